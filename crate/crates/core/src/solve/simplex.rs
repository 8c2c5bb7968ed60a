//! Bounded dual simplex on a dense tableau.
//!
//! Rows are stored as `a x + s = 0` with one logical `s` per row bounded by
//! `[-hi, -lo]`. The all-logical start is dual feasible whenever every cost
//! is non-negative or its variable has a finite upper bound, which holds for
//! every instance the model builder emits. Branching only moves bounds, so
//! the tableau stays dual feasible and each node warm-starts from its
//! predecessor.

const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-7;
const RESCUE_PIVOT_TOL: f64 = 1e-10;
const DROP_TOL: f64 = 1e-13;
const DRIFT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    /// Row (or bound of a basic structural) that cannot be satisfied.
    Infeasible {
        column: usize,
    },
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub terms: Vec<(usize, f64)>,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct DualSimplex {
    n: usize,
    m: usize,
    width: usize,
    rows: Vec<LpRow>,
    tableau: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    value: Vec<f64>,
    reduced: Vec<f64>,
    basis: Vec<usize>,
    /// Row index for basic columns, `usize::MAX` otherwise.
    row_of: Vec<usize>,
    pivots_since_refactor: usize,
    pub iterations: u64,
    scratch: Vec<usize>,
    /// Structural `j` is stored as `x_j / col_scale[j]`.
    col_scale: Vec<f64>,
    /// Scaled structural columns as `(row, coefficient)`.
    columns: Vec<Vec<(usize, f64)>>,
}

impl DualSimplex {
    /// `None` when some negative cost sits on a variable unbounded above.
    pub fn new(cost: &[f64], lower: &[f64], upper: &[f64], rows: Vec<LpRow>) -> Option<Self> {
        let n = cost.len();
        let m = rows.len();
        let width = n + m;
        let (row_scale, col_scale) = equilibrate(n, &rows);
        let rows: Vec<LpRow> = rows
            .into_iter()
            .zip(&row_scale)
            .map(|(r, &rs)| LpRow {
                terms: r.terms.iter().map(|&(j, a)| (j, a * rs * col_scale[j])).collect(),
                lower: r.lower * rs,
                upper: r.upper * rs,
            })
            .collect();
        let cost: Vec<f64> = cost.iter().zip(&col_scale).map(|(c, s)| c * s).collect();
        let lower: Vec<f64> = lower.iter().zip(&col_scale).map(|(v, s)| v / s).collect();
        let upper: Vec<f64> = upper.iter().zip(&col_scale).map(|(v, s)| v / s).collect();
        let cost = cost.as_slice();
        let mut tableau = vec![0.0; m * width];
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in &r.terms {
                tableau[i * width + j] += a;
            }
            tableau[i * width + n + i] = 1.0;
        }
        let mut columns = vec![Vec::new(); n];
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in &r.terms {
                columns[j].push((i, a));
            }
        }
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        for r in &rows {
            lo.push(-r.upper);
            hi.push(-r.lower);
        }
        let mut full_cost = cost.to_vec();
        full_cost.resize(width, 0.0);
        let mut value = vec![0.0; width];
        for j in 0..n {
            value[j] = if cost[j] >= 0.0 {
                if lo[j].is_finite() {
                    lo[j]
                } else if hi[j].is_finite() {
                    hi[j]
                } else {
                    0.0
                }
            } else if hi[j].is_finite() {
                hi[j]
            } else {
                return None;
            };
        }
        let mut lp = DualSimplex {
            n,
            m,
            width,
            rows,
            tableau,
            lower: lo,
            upper: hi,
            reduced: full_cost.clone(),
            cost: full_cost,
            value,
            basis: (n..width).collect(),
            row_of: (0..width).map(|j| if j >= n { j - n } else { usize::MAX }).collect(),
            pivots_since_refactor: 0,
            iterations: 0,
            scratch: Vec::new(),
            col_scale,
            columns,
        };
        lp.recompute_basic_values();
        Some(lp)
    }

    pub fn num_structural(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> Vec<f64> {
        self.value[..self.n].iter().zip(&self.col_scale).map(|(v, s)| v * s).collect()
    }

    pub fn objective(&self) -> f64 {
        (0..self.n).map(|j| self.cost[j] * self.value[j]).sum()
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        let s = self.col_scale.get(j).copied().unwrap_or(1.0);
        (self.lower[j] * s, self.upper[j] * s)
    }

    /// Row index behind a logical column.
    pub fn row_of_column(&self, column: usize) -> Option<usize> {
        column.checked_sub(self.n)
    }

    fn is_basic(&self, j: usize) -> bool {
        self.row_of[j] != usize::MAX
    }

    /// Moves a variable's bounds; nonbasic variables jump to the bound their
    /// reduced cost prefers.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        let s = self.col_scale.get(j).copied().unwrap_or(1.0);
        self.lower[j] = lower / s;
        self.upper[j] = upper / s;
        if self.is_basic(j) {
            return;
        }
        let target = self.nonbasic_target(j);
        let delta = target - self.value[j];
        if delta != 0.0 {
            self.value[j] = target;
            for i in 0..self.m {
                let a = self.tableau[i * self.width + j];
                if a != 0.0 {
                    self.value[self.basis[i]] -= a * delta;
                }
            }
        }
    }

    fn nonbasic_target(&self, j: usize) -> f64 {
        let (lo, hi) = (self.lower[j], self.upper[j]);
        if self.reduced[j] >= -DUAL_TOL {
            if lo.is_finite() {
                lo
            } else {
                hi
            }
        } else if hi.is_finite() {
            hi
        } else {
            lo
        }
    }

    fn recompute_basic_values(&mut self) {
        for i in 0..self.m {
            let row = &self.tableau[i * self.width..(i + 1) * self.width];
            let mut acc = 0.0;
            for (j, &a) in row.iter().enumerate() {
                if self.row_of[j] == usize::MAX && a != 0.0 {
                    acc -= a * self.value[j];
                }
            }
            self.value[self.basis[i]] = acc;
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let mut d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tableau[i * self.width..(i + 1) * self.width];
                for j in 0..self.width {
                    d[j] -= cb * row[j];
                }
            }
        }
        for &b in &self.basis {
            d[b] = 0.0;
        }
        self.reduced = d;
    }

    /// Largest error of tableau column `j` against `B^-1 a_j`.
    fn column_error(&self, j: usize) -> f64 {
        let (m, w, n) = (self.m, self.width, self.n);
        let mut acc = vec![0.0; m];
        for r in 0..m {
            let t = self.tableau[r * w + j];
            if t == 0.0 {
                continue;
            }
            let b = self.basis[r];
            if b < n {
                for &(i, a) in &self.columns[b] {
                    acc[i] += t * a;
                }
            } else {
                acc[b - n] += t;
            }
        }
        if j < n {
            for &(i, a) in &self.columns[j] {
                acc[i] -= a;
            }
        } else {
            acc[j - n] -= 1.0;
        }
        acc.iter().fold(0.0, |e, v| e.max(v.abs()))
    }

    /// Rebuilds `B^-1 [A I]` for the current basis from the original rows.
    fn refactor(&mut self) {
        let (m, w, n) = (self.m, self.width, self.n);
        let mut t = vec![0.0; m * w];
        for (i, r) in self.rows.iter().enumerate() {
            for &(j, a) in &r.terms {
                t[i * w + j] += a;
            }
            t[i * w + n + i] = 1.0;
        }
        let cols = self.basis.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        for &q in &cols {
            let mut best = usize::MAX;
            let mut best_abs = 0.0;
            for i in 0..m {
                if !assigned[i] {
                    let a = t[i * w + q].abs();
                    if a > best_abs {
                        best_abs = a;
                        best = i;
                    }
                }
            }
            if best == usize::MAX || best_abs < 1e-12 {
                // singular basis; keep the drifted tableau
                self.pivots_since_refactor = 0;
                return;
            }
            pivot_dense(&mut t, m, w, best, q, &mut Vec::new());
            assigned[best] = true;
            new_basis[best] = q;
        }
        self.tableau = t;
        self.basis = new_basis;
        for j in 0..w {
            self.row_of[j] = usize::MAX;
        }
        for (i, &b) in self.basis.iter().enumerate() {
            self.row_of[b] = i;
        }
        self.pivots_since_refactor = 0;
        self.recompute_reduced_costs();
        self.recompute_basic_values();
    }

    /// Re-optimizes after bound changes.
    pub fn solve(&mut self, max_iterations: u64) -> LpStatus {
        self.recompute_basic_values();
        let mut iters = 0u64;
        loop {
            if self.pivots_since_refactor >= REFACTOR_EVERY {
                self.refactor();
            }
            let Some((r, below)) = self.leaving_row() else {
                return LpStatus::Optimal;
            };
            if iters >= max_iterations {
                return LpStatus::IterationLimit;
            }
            let q = match self.entering_column(r, below, PIVOT_TOL) {
                Some(q) => q,
                None => {
                    let Some(q) = self.entering_column(r, below, RESCUE_PIVOT_TOL) else {
                        return LpStatus::Infeasible { column: self.basis[r] };
                    };
                    if self.pivots_since_refactor > 0 {
                        self.refactor();
                        continue;
                    }
                    self.pivot(r, q, below);
                    self.refactor();
                    iters += 1;
                    self.iterations += 1;
                    continue;
                }
            };
            let leaving = self.basis[r];
            self.pivot(r, q, below);
            iters += 1;
            self.iterations += 1;
            if self.column_error(leaving) > DRIFT_TOL {
                self.refactor();
            }
        }
    }

    fn leaving_row(&self) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool)> = None;
        let mut worst = PRIMAL_TOL;
        for i in 0..self.m {
            let b = self.basis[i];
            let v = self.value[b];
            let below = self.lower[b] - v;
            let above = v - self.upper[b];
            if below > worst {
                worst = below;
                best = Some((i, true));
            } else if above > worst {
                worst = above;
                best = Some((i, false));
            }
        }
        best
    }

    fn entering_column(&self, r: usize, below: bool, tol: f64) -> Option<usize> {
        let row = &self.tableau[r * self.width..(r + 1) * self.width];
        // Harris two-pass ratio test
        let mut bound = f64::INFINITY;
        let mut eligible: Vec<(usize, f64)> = Vec::new();
        for (j, &a) in row.iter().enumerate() {
            if self.is_basic(j) || self.lower[j] == self.upper[j] {
                continue;
            }
            if a.abs() < tol {
                continue;
            }
            let at_lower = self.value[j] == self.lower[j];
            // basic must move up (below) or down; x_B changes by -a * dx_j
            let ok = match (below, at_lower) {
                (true, true) => a < 0.0,
                (true, false) => a > 0.0,
                (false, true) => a > 0.0,
                (false, false) => a < 0.0,
            };
            if !ok {
                continue;
            }
            let d = self.reduced[j].abs();
            bound = bound.min((d + DUAL_TOL) / a.abs());
            eligible.push((j, a));
        }
        let mut pick = None;
        let mut pick_abs = 0.0;
        for (j, a) in eligible {
            if self.reduced[j].abs() / a.abs() <= bound && a.abs() > pick_abs {
                pick_abs = a.abs();
                pick = Some(j);
            }
        }
        pick
    }

    fn pivot(&mut self, r: usize, q: usize, below: bool) {
        let w = self.width;
        let leaving = self.basis[r];
        let target = if below { self.lower[leaving] } else { self.upper[leaving] };
        let alpha = self.tableau[r * w + q];

        // primal step
        let dq = (target - self.value[leaving]) / -alpha;
        self.value[q] += dq;
        for i in 0..self.m {
            let a = self.tableau[i * w + q];
            if a != 0.0 {
                self.value[self.basis[i]] -= a * dq;
            }
        }
        self.value[leaving] = target;

        // dual step
        let theta = self.reduced[q] / alpha;
        if theta != 0.0 {
            let row = &self.tableau[r * w..(r + 1) * w];
            for (j, &a) in row.iter().enumerate() {
                if a != 0.0 {
                    self.reduced[j] -= theta * a;
                }
            }
        }
        self.reduced[q] = 0.0;

        pivot_dense(&mut self.tableau, self.m, w, r, q, &mut self.scratch);
        self.basis[r] = q;
        self.row_of[q] = r;
        self.row_of[leaving] = usize::MAX;
        self.pivots_since_refactor += 1;
    }
}

/// Power-of-two row and column factors that pull every nonzero toward one.
fn equilibrate(n: usize, rows: &[LpRow]) -> (Vec<f64>, Vec<f64>) {
    let mut rs = vec![1.0; rows.len()];
    let mut cs = vec![1.0; n];
    let pow2 = |x: f64| x.log2().round().exp2();
    for _ in 0..4 {
        for (i, r) in rows.iter().enumerate() {
            let (lo, hi) = r.terms.iter().filter(|t| t.1 != 0.0).fold((f64::INFINITY, 0.0f64), |(lo, hi), &(j, a)| {
                let v = (a * cs[j]).abs();
                (lo.min(v), hi.max(v))
            });
            if hi > 0.0 {
                rs[i] = pow2(1.0 / (lo * hi).sqrt());
            }
        }
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![0.0f64; n];
        for (i, r) in rows.iter().enumerate() {
            for &(j, a) in &r.terms {
                if a != 0.0 {
                    let v = (a * rs[i]).abs();
                    lo[j] = lo[j].min(v);
                    hi[j] = hi[j].max(v);
                }
            }
        }
        for j in 0..n {
            if hi[j] > 0.0 {
                cs[j] = pow2(1.0 / (lo[j] * hi[j]).sqrt());
            }
        }
    }
    (rs, cs)
}

fn pivot_dense(t: &mut [f64], m: usize, w: usize, r: usize, q: usize, nz: &mut Vec<usize>) {
    let inv = 1.0 / t[r * w + q];
    nz.clear();
    for j in 0..w {
        let v = t[r * w + j];
        if v != 0.0 {
            let s = v * inv;
            t[r * w + j] = if s.abs() < DROP_TOL { 0.0 } else { s };
            if t[r * w + j] != 0.0 {
                nz.push(j);
            }
        }
    }
    t[r * w + q] = 1.0;
    let (before, rest) = t.split_at_mut(r * w);
    let (pivot_row, after) = rest.split_at_mut(w);
    let dense = nz.len() * 4 > w;
    for chunk in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
        let f = chunk[q];
        if f == 0.0 {
            continue;
        }
        if dense {
            for (c, &p) in chunk.iter_mut().zip(pivot_row.iter()) {
                *c -= f * p;
            }
        } else {
            for &j in nz.iter() {
                let v = chunk[j] - f * pivot_row[j];
                chunk[j] = if v.abs() < DROP_TOL { 0.0 } else { v };
            }
        }
        chunk[q] = 0.0;
    }
    debug_assert_eq!(t.len(), m * w);
}
