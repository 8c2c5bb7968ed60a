use std::time::Instant;

use super::simplex::{DualSimplex, LpRow, LpStatus};
use super::{Solution, SolveBudget, SolveStatus, SolverStats};
use crate::model::{ModelInstance, Sense, VarKind};

const INT_TOL: f64 = 1e-6;
const LP_ITERATION_CAP: u64 = 200_000;

/// Branch-and-bound over the LP relaxation. Proves optimality within
/// `budget.gap_tolerance` or reports the best incumbent it found.
pub fn solve_exact(model: &ModelInstance, budget: &SolveBudget) -> Solution {
    solve_exact_with(model, budget, None)
}

/// As [`solve_exact`], seeded with a known feasible assignment.
pub fn solve_exact_with(model: &ModelInstance, budget: &SolveBudget, warm_start: Option<&[f64]>) -> Solution {
    let start = Instant::now();
    let mut stats = SolverStats::default();
    let n = model.variables.len();
    let mut cost = vec![0.0; n];
    for &(j, c) in &model.objective {
        cost[j] += c;
    }
    let lower: Vec<f64> = model.variables.iter().map(|v| v.lower).collect();
    let upper: Vec<f64> = model.variables.iter().map(|v| v.upper).collect();
    let rows: Vec<LpRow> = model
        .constraints
        .iter()
        .map(|c| {
            let (lo, hi) = match c.sense {
                Sense::Le => (f64::NEG_INFINITY, c.rhs),
                Sense::Ge => (c.rhs, f64::INFINITY),
                Sense::Eq => (c.rhs, c.rhs),
            };
            LpRow { terms: c.terms.clone(), lower: lo, upper: hi }
        })
        .collect();
    let Some(mut lp) = DualSimplex::new(&cost, &lower, &upper, rows) else {
        return Solution::infeasible(stats, Some("objective unbounded below".into()));
    };
    let binary: Vec<bool> = model.variables.iter().map(|v| v.kind == VarKind::Binary).collect();

    let mut incumbent: Option<(f64, Vec<f64>)> = warm_start.map(|x| (model.objective_value(x), x.to_vec()));

    // Each node is the list of binary fixings from the root plus the bound
    // of the parent relaxation.
    let mut stack: Vec<Node> = vec![Node { fixings: Vec::new(), parent_bound: f64::NEG_INFINITY, step: 0.0 }];
    let mut pseudo = Pseudocosts::new(n);
    let mut fixed: Vec<Option<bool>> = vec![None; n];
    let mut fixed_list: Vec<usize> = Vec::new();
    let mut want: Vec<Option<bool>> = vec![None; n];
    let mut complete = true;
    let mut root_certificate = None;

    let threshold = |inc: &Option<(f64, Vec<f64>)>| match inc {
        Some((z, _)) => z - (budget.gap_tolerance * z.abs()).max(1e-9),
        None => f64::INFINITY,
    };
    let deadline = budget.wall_time();

    while let Some(Node { fixings, parent_bound, step }) = stack.pop() {
        if parent_bound >= threshold(&incumbent) {
            continue;
        }
        if stats.nodes >= budget.max_nodes || start.elapsed() >= deadline {
            complete = false;
            break;
        }
        stats.nodes += 1;

        for &(j, val) in &fixings {
            want[j] = Some(val);
        }
        let mut next_list = Vec::with_capacity(fixings.len());
        for &j in &fixed_list {
            if want[j].is_none() {
                lp.set_bounds(j, lower[j], upper[j]);
                fixed[j] = None;
            }
        }
        for &(j, val) in &fixings {
            if fixed[j] != Some(val) {
                let b = if val { 1.0 } else { 0.0 };
                lp.set_bounds(j, b, b);
                fixed[j] = Some(val);
            }
            next_list.push(j);
        }
        for &(j, _) in &fixings {
            want[j] = None;
        }
        fixed_list = next_list;

        let before = lp.iterations;
        let status = lp.solve(LP_ITERATION_CAP);
        stats.lp_iterations += lp.iterations - before;
        match status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible { column } => {
                if let Some(&(j, up)) = fixings.last() {
                    pseudo.record_infeasible(j, up);
                }
                if fixings.is_empty() {
                    root_certificate = Some(certificate(model, &lp, column));
                }
                continue;
            }
            LpStatus::IterationLimit => {
                complete = false;
                continue;
            }
        }
        let bound = lp.objective();
        if let Some(&(j, up)) = fixings.last() {
            pseudo.record(j, up, (bound - parent_bound).max(0.0) / step);
        }
        if bound >= threshold(&incumbent) {
            continue;
        }
        let values = lp.values();
        let mut branch: Option<(usize, f64)> = None;
        let mut best = f64::NEG_INFINITY;
        for j in 0..n {
            if binary[j] && fixed[j].is_none() {
                let v = values[j];
                if (v - v.round()).abs() <= INT_TOL {
                    continue;
                }
                let score = pseudo.score(j, v);
                if score > best {
                    best = score;
                    branch = Some((j, v));
                }
            }
        }
        match branch {
            None => {
                if let Some((z, x)) = polish(model, &mut lp, &lower, &upper, &binary, &fixed, &mut stats) {
                    if incumbent.as_ref().is_none_or(|(best, _)| z < *best) {
                        incumbent = Some((z, x));
                    }
                }
            }
            Some((j, v)) => {
                let up_first = v >= 0.5;
                let mut down = fixings.clone();
                down.push((j, false));
                let mut up = fixings;
                up.push((j, true));
                let down = Node { fixings: down, parent_bound: bound, step: v };
                let up = Node { fixings: up, parent_bound: bound, step: 1.0 - v };
                if up_first {
                    stack.push(down);
                    stack.push(up);
                } else {
                    stack.push(up);
                    stack.push(down);
                }
            }
        }
    }
    stats.wall_time_ms = start.elapsed().as_millis();

    match incumbent {
        Some((z, x)) => Solution {
            assignment: x,
            objective_value: z,
            status: if complete { SolveStatus::Optimal } else { SolveStatus::BudgetExhausted },
            stats,
            certificate: None,
        },
        None if complete => Solution::infeasible(stats, root_certificate.or(Some("no integral point".into()))),
        None => Solution {
            assignment: Vec::new(),
            objective_value: f64::INFINITY,
            status: SolveStatus::BudgetExhausted,
            stats,
            certificate: None,
        },
    }
}

/// Rounds the binaries of an integral relaxation point and re-solves the
/// continuous part so every row holds to solver precision.
fn polish(
    model: &ModelInstance,
    lp: &mut DualSimplex,
    lower: &[f64],
    upper: &[f64],
    binary: &[bool],
    fixed: &[Option<bool>],
    stats: &mut SolverStats,
) -> Option<(f64, Vec<f64>)> {
    let values = lp.values();
    let drift =
        (0..values.len()).filter(|&j| binary[j]).map(|j| (values[j] - values[j].round()).abs()).fold(0.0, f64::max);
    if drift <= 1e-12 {
        let mut x = values;
        for j in 0..x.len() {
            if binary[j] {
                x[j] = x[j].round();
            }
        }
        return Some((model.objective_value(&x), x));
    }
    let touched: Vec<usize> = (0..values.len()).filter(|&j| binary[j] && fixed[j].is_none()).collect();
    for &j in &touched {
        let b = values[j].round();
        lp.set_bounds(j, b, b);
    }
    let before = lp.iterations;
    let status = lp.solve(LP_ITERATION_CAP);
    stats.lp_iterations += lp.iterations - before;
    let out = (status == LpStatus::Optimal).then(|| {
        let mut x = lp.values();
        for j in 0..x.len() {
            if binary[j] {
                x[j] = x[j].round();
            }
        }
        (model.objective_value(&x), x)
    });
    for &j in &touched {
        lp.set_bounds(j, lower[j], upper[j]);
    }
    out
}

struct Node {
    fixings: Vec<(usize, bool)>,
    parent_bound: f64,
    /// Distance the last fixing moved its variable from the parent value.
    step: f64,
}

/// Average bound gain per unit change, per variable and direction.
struct Pseudocosts {
    sum: Vec<[f64; 2]>,
    count: Vec<[u32; 2]>,
    total: [f64; 2],
    total_count: [u32; 2],
}

impl Pseudocosts {
    fn new(n: usize) -> Self {
        Pseudocosts { sum: vec![[0.0; 2]; n], count: vec![[0; 2]; n], total: [0.0; 2], total_count: [0; 2] }
    }

    fn record(&mut self, j: usize, up: bool, gain: f64) {
        let d = usize::from(up);
        self.sum[j][d] += gain;
        self.count[j][d] += 1;
        self.total[d] += gain;
        self.total_count[d] += 1;
    }

    fn record_infeasible(&mut self, j: usize, up: bool) {
        let d = usize::from(up);
        let worst = self.estimate(j, d) * 10.0;
        self.record(j, up, worst);
    }

    fn estimate(&self, j: usize, d: usize) -> f64 {
        if self.count[j][d] > 0 {
            self.sum[j][d] / f64::from(self.count[j][d])
        } else if self.total_count[d] > 0 {
            self.total[d] / f64::from(self.total_count[d])
        } else {
            1.0
        }
    }

    fn score(&self, j: usize, v: f64) -> f64 {
        let down = self.estimate(j, 0) * v;
        let up = self.estimate(j, 1) * (1.0 - v);
        down.max(1e-12) * up.max(1e-12)
    }
}

fn certificate(model: &ModelInstance, lp: &DualSimplex, column: usize) -> String {
    match lp.row_of_column(column) {
        Some(i) => model.constraints[i].name.clone(),
        None => format!("bounds of {}", model.variables[column].name),
    }
}
