//! Greedy construction plus simulated-annealing local search over the
//! independent choices of a solution (routes and instance servers).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::verify::verify;
use super::{Solution, SolveBudget, SolveStatus, SolverStats};
use crate::model::{ChainDecision, Decisions, Method, ModelInstance, ModelKind};
use crate::topology::ServerId;

const CAPACITY_SLACK: f64 = 1e-12;
const PLACE_ATTEMPTS: usize = 256;
const RESTARTS: u64 = 4;
const CONSTRUCT_RETRIES: usize = 8;
const TEMPERATURE_SAMPLES: usize = 200;
const EXCHANGE_SHARE: f64 = 0.15;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mode {
    Initial,
    Main(Method),
}

impl Mode {
    fn single(self) -> bool {
        matches!(self, Mode::Initial | Mode::Main(Method::Migration))
    }
}

/// Servers of one demand's path with first and last visit positions of
/// their node in the service-node sequence.
struct PathInfo {
    servers: Vec<(ServerId, usize, usize)>,
    links: Vec<usize>,
}

impl PathInfo {
    fn find(&self, x: ServerId) -> Option<(usize, usize)> {
        self.servers.iter().find(|s| s.0 == x).map(|s| (s.1, s.2))
    }
}

#[derive(Debug, Clone, Default)]
struct Contribution {
    /// (server, utilization, instance count)
    servers: Vec<(usize, f64, u32)>,
    links: Vec<(usize, f64)>,
    kv: f64,
}

struct Ctx<'a> {
    model: &'a ModelInstance,
    mode: Mode,
    /// `paths[s][o][d]`
    paths: Vec<Vec<Vec<PathInfo>>>,
    server_cap: Vec<f64>,
    link_cap: Vec<f64>,
    wv: f64,
    wx: f64,
    wl: f64,
    /// Cost charged when the initial instance of (s, v) disappears.
    drop_cost: Vec<Vec<f64>>,
    max_routes: Vec<usize>,
}

/// Backtracking state of `place_single`.
struct SingleSearch {
    s: usize,
    o: usize,
    nd: usize,
    ranked: Vec<Vec<ServerId>>,
    /// Load of each VNF in capacity units, before dividing by the server's capacity.
    loads: Vec<f64>,
    /// Remaining capacity per server with chain `s` removed.
    free: Vec<f64>,
    choice: Vec<ServerId>,
    attempts: usize,
    best: Option<(ChainDecision, f64, Contribution)>,
}

#[derive(Clone)]
struct State {
    dec: Vec<ChainDecision>,
    contrib: Vec<Contribution>,
    server_util: Vec<f64>,
    server_count: Vec<u32>,
    link_util: Vec<f64>,
    cost: f64,
}

impl<'a> Ctx<'a> {
    fn new(model: &'a ModelInstance) -> Self {
        let d = &model.data;
        let topo = &d.topology;
        let mode = match model.meta.kind {
            ModelKind::Initial => Mode::Initial,
            ModelKind::Main(m) => Mode::Main(m),
        };
        let paths = d
            .workload
            .chains
            .iter()
            .enumerate()
            .map(|(s, chain)| {
                d.catalog.chains[s]
                    .options
                    .iter()
                    .map(|o| {
                        (0..chain.demands.len())
                            .map(|dm| {
                                let p = o.path(dm);
                                let seq = &p.service_nodes;
                                let mut servers = Vec::new();
                                for (i, &n) in seq.iter().enumerate() {
                                    if seq[..i].contains(&n) {
                                        continue;
                                    }
                                    let last = seq.iter().rposition(|&m| m == n).unwrap_or(i);
                                    for &x in &topo.node(n).servers {
                                        servers.push((x, i, last));
                                    }
                                }
                                PathInfo { servers, links: p.links.iter().map(|l| l.0).collect() }
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let params = model.meta.params;
        let (wv, wx, wl) = match model.meta.kind {
            // link load only breaks ties between equal server counts
            ModelKind::Initial => (0.0, 0.0, 0.5 / topo.links.len().max(1) as f64),
            ModelKind::Main(_) => (
                params.alpha / d.workload.total_vnfs().max(1) as f64,
                (1.0 - params.alpha) / topo.servers.len().max(1) as f64,
                params.beta / topo.links.len().max(1) as f64,
            ),
        };
        let drop_cost = d
            .workload
            .chains
            .iter()
            .enumerate()
            .map(|(s, chain)| {
                (0..chain.vnfs.len())
                    .map(|v| match &d.initial {
                        Some(init) => {
                            let x = init.chains[s].vnf_servers[v];
                            d.costs.envelope(params.e_m * init.utilization(topo, &d.workload, s, v, x))
                        }
                        None => 0.0,
                    })
                    .collect()
            })
            .collect();
        let max_routes = d.candidates.iter().map(|c| params.r_max.min(c.len()).saturating_add(1)).collect();
        Ctx {
            model,
            mode,
            paths,
            server_cap: topo.servers.iter().map(|x| x.capacity).collect(),
            link_cap: topo.links.iter().map(|l| l.capacity).collect(),
            wv,
            wx,
            wl,
            drop_cost,
            max_routes,
        }
    }

    fn initial_server(&self, s: usize, v: usize) -> Option<ServerId> {
        self.model.data.initial.as_ref().map(|init| init.chains[s].vnf_servers[v])
    }

    fn instances(dec: &ChainDecision, v: usize) -> Vec<ServerId> {
        let mut xs: Vec<ServerId> = dec.servers.iter().map(|sv| sv[v]).collect();
        xs.sort_unstable();
        xs.dedup();
        xs
    }

    /// Every chain-local row: routing, ordering, instance counts, pinning.
    fn structural_ok(&self, s: usize, dec: &ChainDecision) -> bool {
        let chain = &self.model.data.workload.chains[s];
        let nd = chain.demands.len();
        if nd == 0 || dec.routes.len() != nd || dec.servers.len() != nd {
            return false;
        }
        let nopt = self.paths[s].len();
        for dm in 0..nd {
            let o = dec.routes[dm];
            if o >= nopt {
                return false;
            }
            let info = &self.paths[s][o][dm];
            let mut prev_first = 0;
            for v in 0..chain.vnfs.len() {
                let Some((first, last)) = info.find(dec.servers[dm][v]) else { return false };
                if v > 0 && prev_first > last {
                    return false;
                }
                prev_first = first;
            }
        }
        if self.mode.single() {
            return dec.routes.iter().all(|&o| o == dec.routes[0])
                && dec.servers.iter().all(|sv| *sv == dec.servers[0]);
        }
        let mut routes = dec.routes.clone();
        routes.sort_unstable();
        routes.dedup();
        if routes.len() > self.max_routes[s] {
            return false;
        }
        for (v, vnf) in chain.vnfs.iter().enumerate() {
            let inst = Self::instances(dec, v);
            let allowed = if vnf.replicable { routes.len() } else { 1 };
            if inst.len() > allowed {
                return false;
            }
            if self.mode == Mode::Main(Method::Replication) {
                let x = self.initial_server(s, v).expect("main model has an initial placement");
                if !inst.contains(&x) {
                    return false;
                }
            }
        }
        true
    }

    /// Chain's share of server and link utilization; `None` if some
    /// instance alone exceeds its server.
    fn contribution(&self, s: usize, dec: &ChainDecision) -> Option<Contribution> {
        let d = &self.model.data;
        let chain = &d.workload.chains[s];
        let overhead = matches!(self.mode, Mode::Main(m) if m.allows_replicas());
        let e_r = self.model.meta.params.e_r;
        let mut servers: Vec<(usize, f64, u32)> = Vec::new();
        let mut kv = 0.0;
        for (v, vnf) in chain.vnfs.iter().enumerate() {
            let mut inst: Vec<(usize, f64)> = Vec::new();
            for (dm, sv) in dec.servers.iter().enumerate() {
                let x = sv[v].0;
                let u = chain.demands[dm].bandwidth * vnf.load_ratio / self.server_cap[x];
                match inst.iter_mut().find(|e| e.0 == x) {
                    Some(e) => e.1 += u,
                    None => inst.push((x, u)),
                }
            }
            let init = self.initial_server(s, v);
            for &(x, u) in &inst {
                if u > 1.0 + CAPACITY_SLACK {
                    return None;
                }
                let mut load = u;
                if overhead && init != Some(ServerId(x)) {
                    load += crate::model::replica_overhead(e_r, self.server_cap[x], u, true);
                }
                match servers.iter_mut().find(|e| e.0 == x) {
                    Some(e) => {
                        e.1 += load;
                        e.2 += 1;
                    }
                    None => servers.push((x, load, 1)),
                }
            }
            if let Some(x) = init {
                if !inst.iter().any(|e| e.0 == x.0) {
                    kv += self.drop_cost[s][v];
                }
            }
        }
        let mut links: Vec<(usize, f64)> = Vec::new();
        for (dm, &o) in dec.routes.iter().enumerate() {
            let bw = chain.demands[dm].bandwidth;
            for &l in &self.paths[s][o][dm].links {
                let u = bw / self.link_cap[l];
                match links.iter_mut().find(|e| e.0 == l) {
                    Some(e) => e.1 += u,
                    None => links.push((l, u)),
                }
            }
        }
        Some(Contribution { servers, links, kv })
    }

    fn server_cost(&self, util: f64, count: u32) -> f64 {
        match self.mode {
            Mode::Initial => f64::from(u8::from(count > 0)),
            Mode::Main(_) => self.wx * self.model.data.costs.envelope(util),
        }
    }

    fn link_cost(&self, util: f64) -> f64 {
        match self.mode {
            Mode::Initial => self.wl * util,
            Mode::Main(_) => self.wl * self.model.data.costs.envelope(util),
        }
    }

    fn empty_state(&self) -> State {
        let topo = &self.model.data.topology;
        let mut st = State {
            dec: Vec::new(),
            contrib: Vec::new(),
            server_util: vec![0.0; topo.servers.len()],
            server_count: vec![0; topo.servers.len()],
            link_util: vec![0.0; topo.links.len()],
            cost: 0.0,
        };
        st.cost = self.full_cost(&st);
        st
    }

    fn full_cost(&self, st: &State) -> f64 {
        let kv: f64 = st.contrib.iter().map(|c| c.kv).sum();
        let xs: f64 = st.server_util.iter().zip(&st.server_count).map(|(&u, &c)| self.server_cost(u, c)).sum();
        let ls: f64 = st.link_util.iter().map(|&u| self.link_cost(u)).sum();
        self.wv * kv + xs + ls
    }

    /// Cost change of replacing `old` by `new`; `None` on capacity overflow.
    fn delta(&self, st: &State, old: &Contribution, new: &Contribution) -> Option<f64> {
        let mut delta = self.wv * (new.kv - old.kv);
        let mut seen: Vec<usize> = Vec::new();
        for &(x, _, _) in old.servers.iter().chain(&new.servers) {
            if seen.contains(&x) {
                continue;
            }
            seen.push(x);
            let (ou, oc) = old.servers.iter().find(|e| e.0 == x).map_or((0.0, 0), |e| (e.1, e.2));
            let (nu, nc) = new.servers.iter().find(|e| e.0 == x).map_or((0.0, 0), |e| (e.1, e.2));
            let u = st.server_util[x] - ou + nu;
            if nu > 0.0 && u > 1.0 + CAPACITY_SLACK {
                return None;
            }
            let c = st.server_count[x] - oc + nc;
            delta += self.server_cost(u.max(0.0), c) - self.server_cost(st.server_util[x], st.server_count[x]);
        }
        seen.clear();
        for &(l, _) in old.links.iter().chain(&new.links) {
            if seen.contains(&l) {
                continue;
            }
            seen.push(l);
            let ou = old.links.iter().find(|e| e.0 == l).map_or(0.0, |e| e.1);
            let nu = new.links.iter().find(|e| e.0 == l).map_or(0.0, |e| e.1);
            let u = st.link_util[l] - ou + nu;
            if nu > 0.0 && u > 1.0 + CAPACITY_SLACK {
                return None;
            }
            delta += self.link_cost(u.max(0.0)) - self.link_cost(st.link_util[l]);
        }
        Some(delta)
    }

    fn apply(&self, st: &mut State, s: usize, dec: ChainDecision, new: Contribution, delta: f64) {
        let old = std::mem::replace(&mut st.contrib[s], new);
        for &(x, u, c) in &old.servers {
            st.server_util[x] -= u;
            st.server_count[x] -= c;
        }
        for &(l, u) in &old.links {
            st.link_util[l] -= u;
        }
        for &(x, u, c) in &st.contrib[s].servers {
            st.server_util[x] += u;
            st.server_count[x] += c;
        }
        for &(l, u) in &st.contrib[s].links {
            st.link_util[l] += u;
        }
        st.dec[s] = dec;
        st.cost += delta;
    }

    /// Tries `dec` for chain `s`; returns the cost delta and its contribution.
    fn evaluate(&self, st: &State, s: usize, dec: &ChainDecision) -> Option<(f64, Contribution)> {
        if !self.structural_ok(s, dec) {
            return None;
        }
        let new = self.contribution(s, dec)?;
        let empty = Contribution::default();
        let delta = self.delta(st, st.contrib.get(s).unwrap_or(&empty), &new)?;
        Some((delta, new))
    }

    /// Single-route, single-instance placement of chain `s` on option `o`,
    /// trying servers in `score` order per VNF with bounded backtracking.
    fn place_single(
        &self,
        st: &State,
        s: usize,
        o: usize,
        score: &dyn Fn(usize, ServerId) -> f64,
    ) -> Option<(ChainDecision, f64, Contribution)> {
        let chain = &self.model.data.workload.chains[s];
        let nd = chain.demands.len();
        if nd == 0 {
            return None;
        }
        let own = st.contrib.get(s);
        let own_link = |l: usize| own.and_then(|c| c.links.iter().find(|e| e.0 == l)).map_or(0.0, |e| e.1);
        let mut added: Vec<(usize, f64)> = Vec::new();
        for (dm, demand) in chain.demands.iter().enumerate() {
            for &l in &self.paths[s][o][dm].links {
                let u = demand.bandwidth / self.link_cap[l];
                match added.iter_mut().find(|e| e.0 == l) {
                    Some(e) => e.1 += u,
                    None => added.push((l, u)),
                }
            }
        }
        if added.iter().any(|&(l, u)| st.link_util[l] - own_link(l) + u > 1.0 + CAPACITY_SLACK) {
            return None;
        }
        // ordering must hold for every demand; ECMP subsets may hash demands
        // onto different paths
        let base = &self.paths[s][o][0];
        let nv = chain.vnfs.len();
        let total: f64 = chain.demands.iter().map(|d| d.bandwidth).sum();
        let mut ranked: Vec<Vec<ServerId>> = Vec::with_capacity(nv);
        for v in 0..nv {
            let mut xs: Vec<ServerId> = base
                .servers
                .iter()
                .map(|e| e.0)
                .filter(|&x| (0..nd).all(|dm| self.paths[s][o][dm].find(x).is_some()))
                .collect();
            xs.sort_by(|&a, &b| score(v, a).total_cmp(&score(v, b)).then(a.cmp(&b)));
            ranked.push(xs);
        }
        let free: Vec<f64> = st
            .server_util
            .iter()
            .enumerate()
            .map(|(x, &u)| 1.0 - u + own.and_then(|c| c.servers.iter().find(|e| e.0 == x)).map_or(0.0, |e| e.1))
            .collect();
        let loads: Vec<f64> = chain.vnfs.iter().map(|f| total * f.load_ratio).collect();
        let mut search =
            SingleSearch { s, o, nd, ranked, loads, free, choice: vec![ServerId(0); nv], attempts: 0, best: None };
        self.dfs(st, &mut search, 0);
        search.best
    }

    fn dfs(&self, st: &State, q: &mut SingleSearch, v: usize) {
        if q.best.is_some() || q.attempts >= PLACE_ATTEMPTS {
            return;
        }
        if v == q.ranked.len() {
            q.attempts += 1;
            let dec = ChainDecision { routes: vec![q.o; q.nd], servers: vec![q.choice.clone(); q.nd] };
            if let Some((delta, c)) = self.evaluate(st, q.s, &dec) {
                q.best = Some((dec, delta, c));
            }
            return;
        }
        for i in 0..q.ranked[v].len() {
            let x = q.ranked[v][i];
            let need = q.loads[v] / self.server_cap[x.0];
            if need > q.free[x.0] + CAPACITY_SLACK {
                continue;
            }
            if v > 0 {
                let prev = q.choice[v - 1];
                let ok = (0..q.nd).all(|dm| {
                    let info = &self.paths[q.s][q.o][dm];
                    matches!((info.find(prev), info.find(x)), (Some((f, _)), Some((_, l))) if f <= l)
                });
                if !ok {
                    continue;
                }
            }
            q.choice[v] = x;
            q.free[x.0] -= need;
            self.dfs(st, q, v + 1);
            q.free[x.0] += need;
            if q.best.is_some() || q.attempts >= PLACE_ATTEMPTS {
                return;
            }
        }
    }

    fn push(&self, st: &mut State, s: usize, dec: ChainDecision, c: Contribution, delta: f64) {
        debug_assert_eq!(st.dec.len(), s);
        st.dec.push(ChainDecision { routes: Vec::new(), servers: Vec::new() });
        st.contrib.push(Contribution::default());
        self.apply(st, s, dec, c, delta);
    }

    /// Initial placement mapped onto the model's catalog.
    fn mapped_initial(&self) -> Option<State> {
        let d = &self.model.data;
        let init = d.initial.as_ref()?;
        let mut st = self.empty_state();
        for (s, chain) in d.workload.chains.iter().enumerate() {
            let options = &d.catalog.chains[s].options;
            let servers = init.chains[s].vnf_servers.clone();
            let nd = chain.demands.len();
            let mut order: Vec<usize> = (0..options.len()).filter(|&o| options[o].baseline).collect();
            if init.chains[s].route < options.len() && d.catalog.routing == crate::model::Routing::Sdn {
                order.push(init.chains[s].route);
            }
            order.extend(0..options.len());
            let found = order.into_iter().find_map(|o| {
                let dec = ChainDecision { routes: vec![o; nd], servers: vec![servers.clone(); nd] };
                self.evaluate(&st, s, &dec).map(|(delta, c)| (dec, delta, c))
            });
            let (dec, delta, c) = found?;
            self.push(&mut st, s, dec, c, delta);
        }
        Some(st)
    }

    /// Greedy insertion of the chains in `order`, with `jitter` added to the
    /// server ranking. With `link_first` each chain takes the option that
    /// adds the least link load, cost deciding ties.
    fn constructive(&self, order: &[usize], jitter: &[f64], link_first: bool) -> Option<State> {
        let n = self.model.data.workload.chains.len();
        let mut st = self.empty_state();
        st.dec = vec![ChainDecision { routes: Vec::new(), servers: Vec::new() }; n];
        st.contrib = vec![Contribution::default(); n];
        for &s in order {
            let mut best: Option<(ChainDecision, f64, Contribution)> = None;
            for o in 0..self.paths[s].len() {
                let score = |v: usize, x: ServerId| -> f64 {
                    let used = st.server_count[x.0] > 0;
                    let init = self.initial_server(s, v) == Some(x);
                    let base = match self.mode {
                        Mode::Initial => f64::from(u8::from(!used)) * 2.0 + st.server_util[x.0],
                        Mode::Main(_) => f64::from(u8::from(!init)) * 2.0 + st.server_util[x.0],
                    };
                    base + jitter[x.0]
                };
                if let Some(cand) = self.place_single(&st, s, o, &score) {
                    let added = |c: &Contribution| c.links.iter().map(|&(_, u)| u).sum::<f64>();
                    let better = best.as_ref().is_none_or(|b| {
                        if link_first {
                            let (p, q) = (added(&cand.2), added(&b.2));
                            p < q - 1e-12 || (p <= q + 1e-12 && cand.1 < b.1 - 1e-15)
                        } else {
                            cand.1 < b.1 - 1e-15
                        }
                    });
                    if better {
                        best = Some(cand);
                    }
                }
                if o >= 64 && best.is_some() && !link_first {
                    break;
                }
            }
            let (dec, delta, c) = best?;
            self.apply(&mut st, s, dec, c, delta);
        }
        Some(st)
    }

    /// Natural order, then largest chains first, then seeded shuffles.
    fn construct(&self, rng: &mut ChaCha8Rng) -> Option<State> {
        let chains = &self.model.data.workload.chains;
        let n = chains.len();
        let servers = self.server_cap.len();
        let natural: Vec<usize> = (0..n).collect();
        let none = vec![0.0; servers];
        let total = |s: usize| -> f64 { chains[s].demands.iter().map(|d| d.bandwidth).sum() };
        let mut decreasing = natural.clone();
        decreasing.sort_by(|&a, &b| total(b).total_cmp(&total(a)).then(a.cmp(&b)));
        for link_first in [false, true] {
            for order in [&natural, &decreasing] {
                if let Some(st) = self.constructive(order, &none, link_first) {
                    return Some(st);
                }
            }
        }
        for _ in 0..CONSTRUCT_RETRIES {
            let mut order = decreasing.clone();
            for i in (1..n).rev() {
                if rng.gen_bool(0.5) {
                    order.swap(i, rng.gen_range(0..=i));
                }
            }
            let jitter: Vec<f64> = (0..servers).map(|_| rng.gen::<f64>()).collect();
            if let Some(st) = self.constructive(&order, &jitter, true) {
                return Some(st);
            }
        }
        None
    }

    /// Temperature at which an average uphill move is accepted with
    /// probability one half, from a sample of proposals.
    fn start_temperature(&self, rng: &mut ChaCha8Rng, st: &State) -> f64 {
        let n = st.dec.len();
        let mut sum = 0.0;
        let mut count = 0usize;
        for _ in 0..TEMPERATURE_SAMPLES {
            let s = rng.gen_range(0..n);
            let Some(dec) = self.propose(rng, st, s) else { continue };
            if let Some((delta, _)) = self.evaluate(st, s, &dec) {
                if delta > 0.0 {
                    sum += delta;
                    count += 1;
                }
            }
        }
        let fallback = (st.cost.abs() * 0.05).max(1e-9);
        if count == 0 {
            return fallback;
        }
        sum / count as f64 / std::f64::consts::LN_2
    }

    fn random_valid_server(&self, rng: &mut ChaCha8Rng, info: &PathInfo, prev: Option<usize>) -> Option<ServerId> {
        let valid: Vec<ServerId> = info.servers.iter().filter(|e| prev.is_none_or(|f| f <= e.2)).map(|e| e.0).collect();
        (!valid.is_empty()).then(|| valid[rng.gen_range(0..valid.len())])
    }

    /// Re-places demand `dm` of chain `s` on option `o`, keeping current or
    /// existing instances where the new path allows.
    fn repair_demand(
        &self,
        rng: &mut ChaCha8Rng,
        s: usize,
        dec: &ChainDecision,
        dm: usize,
        o: usize,
    ) -> Option<Vec<ServerId>> {
        let info = &self.paths[s][o][dm];
        let nv = dec.servers[dm].len();
        let mut out = Vec::with_capacity(nv);
        let mut prev: Option<usize> = None;
        for v in 0..nv {
            let ok = |x: ServerId| info.find(x).filter(|&(_, l)| prev.is_none_or(|f| f <= l)).map(|(f, _)| f);
            let cur = dec.servers[dm][v];
            let pick = ok(cur)
                .map(|f| (cur, f))
                .or_else(|| Self::instances(dec, v).into_iter().find_map(|x| ok(x).map(|f| (x, f))));
            let (x, f) = match pick {
                Some(p) => p,
                None => {
                    let x = self.random_valid_server(rng, info, prev)?;
                    (x, info.find(x)?.0)
                }
            };
            out.push(x);
            prev = Some(f);
        }
        Some(out)
    }

    /// Every demand back on the initial servers, keeping its route when the
    /// route still admits them.
    fn restore_initial(&self, s: usize, cur: &ChainDecision) -> Option<ChainDecision> {
        let init = &self.model.data.initial.as_ref()?.chains[s].vnf_servers;
        let mut dec = cur.clone();
        for dm in 0..dec.routes.len() {
            let fits = |o: usize| {
                let info = &self.paths[s][o][dm];
                let mut prev = 0;
                init.iter().all(|&x| match info.find(x) {
                    Some((f, l)) if prev <= l => {
                        prev = f;
                        true
                    }
                    _ => false,
                })
            };
            let o = std::iter::once(cur.routes[dm]).chain(0..self.paths[s].len()).find(|&o| fits(o))?;
            dec.routes[dm] = o;
            dec.servers[dm] = init.clone();
        }
        Some(dec)
    }

    /// Deterministic neighbourhood of chain `s` for the final descent.
    fn neighbours(&self, st: &State, s: usize) -> Vec<ChainDecision> {
        let cur = &st.dec[s];
        let nd = cur.routes.len();
        let nv = cur.servers.first().map_or(0, |sv| sv.len());
        let mut out = Vec::new();
        if let Some(d) = self.restore_initial(s, cur) {
            out.push(d);
        }
        for v in 0..nv {
            for y in Self::instances(cur, v) {
                let users: Vec<usize> = (0..nd).filter(|&dm| cur.servers[dm][v] == y).collect();
                for &(x, _, _) in &self.paths[s][cur.routes[users[0]]][users[0]].servers {
                    let mut d = cur.clone();
                    for &dm in &users {
                        d.servers[dm][v] = x;
                    }
                    out.push(d);
                }
            }
            if !self.mode.single() {
                for dm in 0..nd {
                    for &(x, _, _) in &self.paths[s][cur.routes[dm]][dm].servers {
                        let mut d = cur.clone();
                        d.servers[dm][v] = x;
                        out.push(d);
                    }
                }
            }
        }
        if !self.mode.single() {
            for a in 0..nd {
                for b in 0..nd {
                    if a != b && (cur.routes[a], &cur.servers[a]) != (cur.routes[b], &cur.servers[b]) {
                        let mut d = cur.clone();
                        d.routes[a] = cur.routes[b];
                        d.servers[a] = cur.servers[b].clone();
                        out.push(d);
                        if a < b {
                            let mut d = cur.clone();
                            d.routes.swap(a, b);
                            d.servers.swap(a, b);
                            out.push(d);
                        }
                    }
                }
            }
        }
        out.retain(|d| d != cur);
        out
    }

    /// Swaps instance `y` of (s, v) with instance `z` of (t, w): every demand
    /// served by one moves to the other's server.
    #[allow(clippy::too_many_arguments)]
    fn exchange(
        &self,
        st: &State,
        s: usize,
        v: usize,
        y: ServerId,
        t: usize,
        w: usize,
        z: ServerId,
    ) -> Option<(ChainDecision, ChainDecision)> {
        if s == t || y == z {
            return None;
        }
        let mut a = st.dec[s].clone();
        let mut b = st.dec[t].clone();
        for sv in &mut a.servers {
            if sv[v] == y {
                sv[v] = z;
            }
        }
        for sv in &mut b.servers {
            if sv[w] == z {
                sv[w] = y;
            }
        }
        Some((a, b))
    }

    /// Applies new decisions for chains `s` and `t` together when `accept`
    /// takes the joint delta; otherwise leaves `st` unchanged.
    fn try_pair(
        &self,
        st: &mut State,
        s: usize,
        a: ChainDecision,
        t: usize,
        b: ChainDecision,
        accept: impl FnOnce(f64) -> bool,
    ) -> bool {
        let Some((d1, c1)) = self.evaluate(st, s, &a) else { return false };
        let old_dec = st.dec[s].clone();
        let old_contrib = st.contrib[s].clone();
        self.apply(st, s, a, c1, d1);
        if let Some((d2, c2)) = self.evaluate(st, t, &b) {
            if accept(d1 + d2) {
                self.apply(st, t, b, c2, d2);
                return true;
            }
        }
        self.apply(st, s, old_dec, old_contrib, -d1);
        false
    }

    fn exchanges(&self, st: &State) -> Vec<(usize, usize, ServerId, usize, usize, ServerId)> {
        let mut out = Vec::new();
        let n = st.dec.len();
        for s in 0..n {
            for t in s + 1..n {
                let (ns, nt) = (st.dec[s].servers[0].len(), st.dec[t].servers[0].len());
                for v in 0..ns {
                    for w in 0..nt {
                        for y in Self::instances(&st.dec[s], v) {
                            for z in Self::instances(&st.dec[t], w) {
                                if y != z {
                                    out.push((s, v, y, t, w, z));
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// First-improvement descent until no neighbour lowers the cost.
    fn descend(&self, st: &mut State, max_evaluations: u64, stats: &mut SolverStats) {
        let mut evaluations = 0;
        let mut improved = true;
        while improved && evaluations < max_evaluations {
            improved = false;
            for (s, v, y, t, w, z) in self.exchanges(st) {
                evaluations += 1;
                let Some((a, b)) = self.exchange(st, s, v, y, t, w, z) else { continue };
                if self.try_pair(st, s, a, t, b, |d| d < -1e-15) {
                    improved = true;
                }
            }
            for s in 0..st.dec.len() {
                for dec in self.neighbours(st, s) {
                    evaluations += 1;
                    if let Some((delta, c)) = self.evaluate(st, s, &dec) {
                        if delta < -1e-15 {
                            self.apply(st, s, dec, c, delta);
                            improved = true;
                            break;
                        }
                    }
                }
            }
        }
        stats.heuristic_iterations += evaluations;
    }

    fn propose(&self, rng: &mut ChaCha8Rng, st: &State, s: usize) -> Option<ChainDecision> {
        let cur = &st.dec[s];
        let nd = cur.routes.len();
        let nv = cur.servers.first().map_or(0, |sv| sv.len());
        let nopt = self.paths[s].len();
        if nd == 0 || nv == 0 {
            return None;
        }
        let mut dec = cur.clone();
        if self.mode.single() {
            match rng.gen_range(0..4) {
                3 => dec = self.restore_initial(s, &dec)?,
                0 => {
                    let v = rng.gen_range(0..nv);
                    let info = &self.paths[s][dec.routes[0]][0];
                    let x = info.servers[rng.gen_range(0..info.servers.len())].0;
                    for sv in &mut dec.servers {
                        sv[v] = x;
                    }
                }
                1 => {
                    let o = rng.gen_range(0..nopt);
                    let servers = self.repair_demand(rng, s, &dec, 0, o)?;
                    dec = ChainDecision { routes: vec![o; nd], servers: vec![servers; nd] };
                }
                _ => {
                    let o = rng.gen_range(0..nopt);
                    let score = |_: usize, x: ServerId| -> f64 {
                        let own = st.contrib[s].servers.iter().find(|e| e.0 == x.0).map_or(0, |e| e.2);
                        let others = st.server_count[x.0] - own;
                        f64::from(u8::from(others == 0)) * 2.0 + rng_free_jitter(x)
                    };
                    let (d, _, _) = self.place_single(st, s, o, &score)?;
                    dec = d;
                }
            }
            return Some(dec);
        }
        match rng.gen_range(0..8) {
            7 => {
                let a = rng.gen_range(0..nd);
                let b = rng.gen_range(0..nd);
                dec.routes.swap(a, b);
                dec.servers.swap(a, b);
            }
            5 => {
                // collapse onto one route and one instance per VNF
                let o = rng.gen_range(0..nopt);
                let weights: Vec<f64> = (0..self.server_cap.len()).map(|_| rng.gen::<f64>()).collect();
                let score = |v: usize, x: ServerId| -> f64 {
                    let init = self.initial_server(s, v) == Some(x);
                    f64::from(u8::from(!init)) + weights[x.0]
                };
                let (d, _, _) = self.place_single(st, s, o, &score)?;
                dec = d;
            }
            6 => dec = self.restore_initial(s, &dec)?,
            0 => {
                // move one instance
                let v = rng.gen_range(0..nv);
                let inst = Self::instances(&dec, v);
                let y = inst[rng.gen_range(0..inst.len())];
                let users: Vec<usize> = (0..nd).filter(|&dm| dec.servers[dm][v] == y).collect();
                let info = &self.paths[s][dec.routes[users[0]]][users[0]];
                let x = info.servers[rng.gen_range(0..info.servers.len())].0;
                for dm in users {
                    dec.servers[dm][v] = x;
                }
            }
            1 => {
                let dm = rng.gen_range(0..nd);
                let o = rng.gen_range(0..nopt);
                dec.servers[dm] = self.repair_demand(rng, s, &dec, dm, o)?;
                dec.routes[dm] = o;
            }
            2 => {
                let dm = rng.gen_range(0..nd);
                let v = rng.gen_range(0..nv);
                let info = &self.paths[s][dec.routes[dm]][dm];
                dec.servers[dm][v] = info.servers[rng.gen_range(0..info.servers.len())].0;
            }
            3 => {
                // drop one instance, moving its demands to the others
                let v = rng.gen_range(0..nv);
                let inst = Self::instances(&dec, v);
                if inst.len() < 2 {
                    return None;
                }
                let y = inst[rng.gen_range(0..inst.len())];
                for dm in 0..nd {
                    if dec.servers[dm][v] == y {
                        let info = &self.paths[s][dec.routes[dm]][dm];
                        dec.servers[dm][v] = *inst.iter().find(|&&x| x != y && info.find(x).is_some())?;
                    }
                }
            }
            _ => {
                // align one demand with another's route and instances
                let a = rng.gen_range(0..nd);
                let b = rng.gen_range(0..nd);
                dec.routes[a] = dec.routes[b];
                dec.servers[a] = dec.servers[b].clone();
                if self.paths[s][dec.routes[a]][a].servers.len() != self.paths[s][dec.routes[b]][b].servers.len() {
                    let o = dec.routes[a];
                    dec.servers[a] = self.repair_demand(rng, s, &dec, a, o)?;
                }
            }
        }
        Some(dec)
    }
}

/// Deterministic tie-break spreading equal scores across servers.
fn rng_free_jitter(x: ServerId) -> f64 {
    (x.0 % 97) as f64 * 1e-6
}

/// Local search from a greedy start. Returns the best verified solution
/// found, or `Infeasible` when no start can be constructed.
pub fn solve_heuristic(model: &ModelInstance, seed: u64, budget: &SolveBudget) -> Solution {
    let started = Instant::now();
    let ctx = Ctx::new(model);
    let mut stats = SolverStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = ctx.mapped_initial().or_else(|| ctx.construct(&mut rng));
    let Some(mut st) = start else {
        stats.wall_time_ms = started.elapsed().as_millis();
        return Solution::infeasible(stats, Some("no feasible greedy construction".into()));
    };
    let nchains = st.dec.len();
    let mut best = st.clone();
    if nchains > 0 && budget.max_iterations > 0 {
        let rounds = RESTARTS.min(budget.max_iterations);
        let per_round = budget.max_iterations / rounds;
        let deadline = budget.wall_time();
        'rounds: for _ in 0..rounds {
            st.clone_from(&best);
            let t0 = match ctx.mode {
                Mode::Initial => 0.5,
                Mode::Main(_) => ctx.start_temperature(&mut rng, &st),
            };
            let cool = 1e-4f64.powf(1.0 / per_round as f64);
            let mut temp = t0;
            for it in 0..per_round {
                if it % 256 == 0 && started.elapsed() >= deadline {
                    break 'rounds;
                }
                stats.heuristic_iterations += 1;
                temp *= cool;
                if nchains > 1 && rng.gen_bool(EXCHANGE_SHARE) {
                    let s = rng.gen_range(0..nchains);
                    let t = rng.gen_range(0..nchains);
                    let v = rng.gen_range(0..st.dec[s].servers[0].len());
                    let w = rng.gen_range(0..st.dec[t].servers[0].len());
                    let ys = Ctx::instances(&st.dec[s], v);
                    let zs = Ctx::instances(&st.dec[t], w);
                    let (y, z) = (ys[rng.gen_range(0..ys.len())], zs[rng.gen_range(0..zs.len())]);
                    let Some((a, b)) = ctx.exchange(&st, s, v, y, t, w, z) else { continue };
                    let u: f64 = rng.gen();
                    if ctx.try_pair(&mut st, s, a, t, b, |d| d <= 0.0 || u < (-d / temp).exp())
                        && st.cost < best.cost - 1e-12
                    {
                        best.clone_from(&st);
                    }
                    continue;
                }
                let s = rng.gen_range(0..nchains);
                let Some(dec) = ctx.propose(&mut rng, &st, s) else { continue };
                if dec == st.dec[s] {
                    continue;
                }
                let Some((delta, c)) = ctx.evaluate(&st, s, &dec) else { continue };
                let accept = delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp();
                if accept {
                    ctx.apply(&mut st, s, dec, c, delta);
                    if st.cost < best.cost - 1e-12 {
                        best.clone_from(&st);
                    }
                }
            }
        }
        ctx.descend(&mut best, budget.max_iterations, &mut stats);
    }
    let decisions = Decisions { chains: best.dec };
    let x = model.complete(&decisions);
    let report = verify(model, &x);
    stats.wall_time_ms = started.elapsed().as_millis();
    if !report.feasible {
        let cert = report.violations.first().map(|v| v.name.clone());
        return Solution::infeasible(stats, cert);
    }
    Solution {
        objective_value: report.objective,
        assignment: x,
        status: SolveStatus::Feasible,
        stats,
        certificate: None,
    }
}
