//! Exhaustive enumeration over routing and usage binaries.
//!
//! Per demand the oracle tries every route variable and every server for
//! each VNF; chain-level and server-level indicators are the ORs of the
//! variables below them. Rows are checked as soon as all of their
//! variables are fixed. Continuous variables come from the model's own
//! rows: defining equalities first, then the smallest value every
//! remaining lower-bounding row allows. Near-optimal leaves found in
//! floating point are re-scored in exact rational arithmetic.

use std::collections::BTreeMap;

use num::{BigRational, Signed, ToPrimitive, Zero};

use vnfplace::model::{ModelInstance, Sense, VarKey, VarKind};

pub trait Scalar: Clone + PartialOrd + std::fmt::Debug {
    fn from_f64(v: f64) -> Self;
    fn zero() -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn is_neg(&self) -> bool;
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn zero() -> Self {
        0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_neg(&self) -> bool {
        *self < 0.0
    }
}

impl Scalar for BigRational {
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite coefficient")
    }
    fn zero() -> Self {
        Zero::zero()
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn is_neg(&self) -> bool {
        self.is_negative()
    }
}

/// Row slack check: `activity` against the row, allowing `tol`.
fn row_holds<T: Scalar>(activity: &T, sense: Sense, rhs: &T, tol: &T) -> bool {
    match sense {
        Sense::Le => !rhs.add(tol).sub(activity).is_neg(),
        Sense::Ge => !activity.add(tol).sub(rhs).is_neg(),
        Sense::Eq => {
            let d = activity.sub(rhs);
            let ad = if d.is_neg() { T::zero().sub(&d) } else { d };
            !(tol.sub(&ad).is_neg())
        }
    }
}

/// Fills continuous variables from fixed binaries and checks every row and
/// bound. `None` when the binaries admit no feasible completion.
pub fn complete<T: Scalar>(model: &ModelInstance, binaries: &[f64], tol: f64) -> Option<Vec<T>> {
    let n = model.variables.len();
    let tol = T::from_f64(tol);
    let mut vals: Vec<Option<T>> = (0..n)
        .map(|j| (model.variables[j].kind == VarKind::Binary).then(|| T::from_f64(binaries[j].round())))
        .collect();
    let coef: Vec<Vec<(usize, T)>> =
        model.constraints.iter().map(|c| c.terms.iter().map(|&(j, a)| (j, T::from_f64(a))).collect()).collect();
    let rhs: Vec<T> = model.constraints.iter().map(|c| T::from_f64(c.rhs)).collect();

    // defining equalities
    loop {
        let mut progress = false;
        for (i, c) in model.constraints.iter().enumerate() {
            if c.sense != Sense::Eq {
                continue;
            }
            let unknown: Vec<usize> = coef[i].iter().filter(|(j, _)| vals[*j].is_none()).map(|&(k, _)| k).collect();
            if unknown.len() != 1 {
                continue;
            }
            let u = unknown[0];
            let mut rest = T::zero();
            let mut a_u = T::zero();
            for (j, a) in &coef[i] {
                if *j == u {
                    a_u = a_u.add(a);
                } else {
                    rest = rest.add(&a.mul(vals[*j].as_ref().expect("known")));
                }
            }
            vals[u] = Some(rhs[i].sub(&rest).div(&a_u));
            progress = true;
        }
        if !progress {
            break;
        }
    }

    // epigraph variables: cheapest value every single-unknown row allows
    let mut floor: BTreeMap<usize, T> = BTreeMap::new();
    for (i, c) in model.constraints.iter().enumerate() {
        let unknown: Vec<usize> = coef[i].iter().filter(|(j, _)| vals[*j].is_none()).map(|&(k, _)| k).collect();
        if unknown.is_empty() {
            continue;
        }
        assert_eq!(unknown.len(), 1, "row {} couples two free variables", c.name);
        let u = unknown[0];
        let mut rest = T::zero();
        let mut a_u = T::zero();
        for (j, a) in &coef[i] {
            if *j == u {
                a_u = a_u.add(a);
            } else {
                rest = rest.add(&a.mul(vals[*j].as_ref().expect("known")));
            }
        }
        let lower_bounding = matches!((c.sense, a_u.is_neg()), (Sense::Ge, false) | (Sense::Le, true));
        assert!(lower_bounding, "row {} bounds {} from above", c.name, model.variables[u].name);
        let bound = rhs[i].sub(&rest).div(&a_u);
        let entry = floor.entry(u).or_insert_with(|| T::from_f64(model.variables[u].lower));
        if bound > *entry {
            *entry = bound;
        }
    }
    for (u, v) in floor {
        vals[u] = Some(v);
    }
    for (j, v) in vals.iter_mut().enumerate() {
        if v.is_none() {
            *v = Some(T::from_f64(model.variables[j].lower));
        }
    }
    let vals: Vec<T> = vals.into_iter().map(|v| v.expect("all filled")).collect();

    for (j, var) in model.variables.iter().enumerate() {
        if T::from_f64(var.lower).sub(&tol) > vals[j] {
            return None;
        }
        if var.upper.is_finite() && vals[j] > T::from_f64(var.upper).add(&tol) {
            return None;
        }
    }
    for (i, c) in model.constraints.iter().enumerate() {
        let act = coef[i].iter().fold(T::zero(), |acc, (j, a)| acc.add(&a.mul(&vals[*j])));
        if !row_holds(&act, c.sense, &rhs[i], &tol) {
            return None;
        }
    }
    Some(vals)
}

pub fn objective<T: Scalar>(model: &ModelInstance, vals: &[T]) -> T {
    model.objective.iter().fold(T::zero(), |acc, &(j, c)| acc.add(&T::from_f64(c).mul(&vals[j])))
}

/// Exact objective of the binaries in `x`, or `None` if they are infeasible
/// in rational arithmetic.
pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("representable")
}

pub fn rational_objective(model: &ModelInstance, x: &[f64]) -> Option<BigRational> {
    let vals = complete::<BigRational>(model, x, 0.0)?;
    Some(objective(model, &vals))
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub optimum: BigRational,
    pub binaries: Vec<f64>,
    pub leaves: usize,
}

enum Step {
    Demand { routes: Vec<usize>, uses: Vec<Vec<usize>> },
    Derive { targets: Vec<(usize, Vec<usize>)> },
    Final { targets: Vec<(usize, Vec<usize>)> },
}

struct Search<'a> {
    model: &'a ModelInstance,
    steps: Vec<Step>,
    rows_at: Vec<Vec<usize>>,
    x: Vec<f64>,
    best: f64,
    pool: Vec<(f64, Vec<f64>)>,
    leaves: usize,
}

fn or_of(x: &[f64], sources: &[usize]) -> f64 {
    if sources.iter().any(|&k| x[k] > 0.5) {
        1.0
    } else {
        0.0
    }
}

impl Search<'_> {
    fn rows_hold(&self, step: usize) -> bool {
        self.rows_at[step].iter().all(|&i| {
            let c = &self.model.constraints[i];
            let act = c.activity(&self.x);
            match c.sense {
                Sense::Le => act <= c.rhs + 1e-9,
                Sense::Ge => act >= c.rhs - 1e-9,
                Sense::Eq => (act - c.rhs).abs() <= 1e-9,
            }
        })
    }

    fn run(&mut self, k: usize) {
        match &self.steps[k] {
            Step::Demand { routes, uses } => {
                let routes = routes.clone();
                let uses = uses.clone();
                let per_vnf: Vec<usize> = uses.iter().map(Vec::len).collect();
                let mut pick = vec![0usize; uses.len()];
                for &r in &routes {
                    self.x[r] = 1.0;
                    loop {
                        for (v, list) in uses.iter().enumerate() {
                            for (i, &j) in list.iter().enumerate() {
                                self.x[j] = if i == pick[v] { 1.0 } else { 0.0 };
                            }
                        }
                        if self.rows_hold(k) {
                            self.run(k + 1);
                        }
                        // odometer over server picks
                        let mut v = 0;
                        while v < pick.len() {
                            pick[v] += 1;
                            if pick[v] < per_vnf[v] {
                                break;
                            }
                            pick[v] = 0;
                            v += 1;
                        }
                        if v == pick.len() {
                            break;
                        }
                    }
                    self.x[r] = 0.0;
                }
                for list in &uses {
                    for &j in list {
                        self.x[j] = 0.0;
                    }
                }
            }
            Step::Derive { targets } => {
                let targets = targets.clone();
                for (j, src) in &targets {
                    self.x[*j] = or_of(&self.x, src);
                }
                if self.rows_hold(k) {
                    self.run(k + 1);
                }
                for (j, _) in &targets {
                    self.x[*j] = 0.0;
                }
            }
            Step::Final { targets } => {
                let targets = targets.clone();
                for (j, src) in &targets {
                    self.x[*j] = or_of(&self.x, src);
                }
                self.leaves += 1;
                if let Some(vals) = complete::<f64>(self.model, &self.x, 1e-9) {
                    let z = objective(self.model, &vals);
                    if z < self.best {
                        self.best = z;
                        let cut = z + 1e-7;
                        self.pool.retain(|(w, _)| *w <= cut);
                    }
                    if z <= self.best + 1e-7 {
                        self.pool.push((z, self.x.clone()));
                    }
                }
                for (j, _) in &targets {
                    self.x[*j] = 0.0;
                }
            }
        }
    }
}

/// Optimum over every routing and usage choice; `None` when no choice is
/// feasible.
pub fn enumerate(model: &ModelInstance) -> Option<Enumeration> {
    let n = model.variables.len();
    let mut routes: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut uses: BTreeMap<(usize, usize), BTreeMap<usize, Vec<usize>>> = BTreeMap::new();
    let mut chain_level: BTreeMap<usize, Vec<(usize, VarKey)>> = BTreeMap::new();
    let mut servers_level: Vec<(usize, VarKey)> = Vec::new();
    for (j, v) in model.variables.iter().enumerate() {
        if v.kind != VarKind::Binary {
            continue;
        }
        match v.key {
            VarKey::RouteDemand { chain, demand, .. } => routes.entry((chain, demand)).or_default().push(j),
            VarKey::Use { chain, vnf, demand, .. } => {
                uses.entry((chain, demand)).or_default().entry(vnf).or_default().push(j)
            }
            VarKey::Place { chain, .. } | VarKey::RouteChain { chain, .. } => {
                chain_level.entry(chain).or_default().push((j, v.key))
            }
            VarKey::UsedServer { .. } => servers_level.push((j, v.key)),
            other => panic!("unexpected binary {other:?}"),
        }
    }
    let sources = |key: VarKey| -> Vec<usize> {
        model
            .variables
            .iter()
            .enumerate()
            .filter(|(_, v)| match (key, v.key) {
                (VarKey::Place { chain, vnf, server }, VarKey::Use { chain: c, vnf: w, server: x, .. }) => {
                    chain == c && vnf == w && server == x
                }
                (VarKey::RouteChain { chain, option }, VarKey::RouteDemand { chain: c, option: o, .. }) => {
                    chain == c && option == o
                }
                (VarKey::UsedServer { server }, VarKey::Place { server: x, .. }) => server == x,
                _ => false,
            })
            .map(|(k, _)| k)
            .collect()
    };

    let mut steps = Vec::new();
    let mut var_step = vec![usize::MAX; n];
    let chains: Vec<usize> =
        routes.keys().map(|k| k.0).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    for &s in &chains {
        for (&(_, _), list) in routes.range((s, 0)..(s + 1, 0)) {
            let key = list.first().map(|&j| model.variables[j].key).expect("route list");
            let VarKey::RouteDemand { demand, .. } = key else { unreachable!() };
            let per_vnf: Vec<Vec<usize>> =
                uses.get(&(s, demand)).map(|m| m.values().cloned().collect()).unwrap_or_default();
            for &j in list.iter().chain(per_vnf.iter().flatten()) {
                var_step[j] = steps.len();
            }
            steps.push(Step::Demand { routes: list.clone(), uses: per_vnf });
        }
        let targets: Vec<(usize, Vec<usize>)> =
            chain_level.get(&s).map(|l| l.iter().map(|&(j, key)| (j, sources(key))).collect()).unwrap_or_default();
        for (j, _) in &targets {
            var_step[*j] = steps.len();
        }
        steps.push(Step::Derive { targets });
    }
    let targets: Vec<(usize, Vec<usize>)> = servers_level.iter().map(|&(j, key)| (j, sources(key))).collect();
    let last = steps.len();
    steps.push(Step::Final { targets });
    for s in var_step.iter_mut() {
        if *s == usize::MAX {
            *s = last;
        }
    }
    let mut rows_at = vec![Vec::new(); steps.len()];
    for (i, c) in model.constraints.iter().enumerate() {
        let st = c.terms.iter().map(|&(j, _)| var_step[j]).max().unwrap_or(last);
        if st != last {
            rows_at[st].push(i);
        }
    }

    let mut search =
        Search { model, steps, rows_at, x: vec![0.0; n], best: f64::INFINITY, pool: Vec::new(), leaves: 0 };
    search.run(0);
    let leaves = search.leaves;
    let mut best: Option<(BigRational, Vec<f64>)> = None;
    for (_, x) in search.pool {
        if let Some(z) = rational_objective(model, &x) {
            if best.as_ref().is_none_or(|(b, _)| z < *b) {
                best = Some((z, x));
            }
        }
    }
    best.map(|(optimum, binaries)| Enumeration { optimum, binaries, leaves })
}
