use std::collections::{BTreeSet, HashMap};

use super::catalog::{path_servers, precedence_sets, RouteCatalog, Routing};
use super::placement::InitialPlacement;
use super::{
    Constraint, Method, MethodParams, ModelData, ModelInstance, ModelKind, ModelMeta, Sense, VarKey, VarKind, Variable,
};
use crate::costs::CostFunctionSet;
use crate::error::{Error, Result};
use crate::topology::{ServerId, Topology};
use crate::workload::Workload;

/// Server overhead of one VNF instance: `E_r * u + active / (C_x * E_r)`.
pub fn replica_overhead(e_r: f64, capacity: f64, vnf_utilization: f64, active: bool) -> f64 {
    e_r * vnf_utilization + f64::from(u8::from(active)) / (capacity * e_r)
}

struct Builder {
    routing: Routing,
    variables: Vec<Variable>,
    index: HashMap<VarKey, usize>,
    constraints: Vec<Constraint>,
}

impl Builder {
    fn new(routing: Routing) -> Self {
        Builder { routing, variables: Vec::new(), index: HashMap::new(), constraints: Vec::new() }
    }

    fn add(&mut self, key: VarKey, kind: VarKind, lower: f64, upper: f64) -> usize {
        let j = self.variables.len();
        self.variables.push(Variable { key, name: key.name(self.routing), kind, lower, upper });
        let prev = self.index.insert(key, j);
        debug_assert!(prev.is_none(), "duplicate variable {key:?}");
        j
    }

    fn binary(&mut self, key: VarKey) -> usize {
        self.add(key, VarKind::Binary, 0.0, 1.0)
    }

    fn unit(&mut self, key: VarKey) -> usize {
        self.add(key, VarKind::Continuous, 0.0, 1.0)
    }

    fn nonneg(&mut self, key: VarKey) -> usize {
        self.add(key, VarKind::Continuous, 0.0, f64::INFINITY)
    }

    fn get(&self, key: VarKey) -> Option<usize> {
        self.index.get(&key).copied()
    }

    fn at(&self, key: VarKey) -> usize {
        self.index[&key]
    }

    fn row(&mut self, name: String, terms: Vec<(usize, f64)>, sense: Sense, rhs: f64) {
        self.constraints.push(Constraint { name, terms, sense, rhs });
    }
}

fn candidates(topo: &Topology, catalog: &RouteCatalog, workload: &Workload) -> Vec<Vec<ServerId>> {
    catalog
        .chains
        .iter()
        .zip(&workload.chains)
        .map(|(routes, chain)| {
            let mut set = BTreeSet::new();
            for o in &routes.options {
                for d in 0..chain.demands.len() {
                    set.extend(path_servers(topo, o.path(d)));
                }
            }
            set.into_iter().collect()
        })
        .collect()
}

/// Routing, usage, ordering, and utilization rows shared by every model.
fn common_rows(b: &mut Builder, data: &ModelData, overhead: Option<(&InitialPlacement, f64)>) {
    let topo = &data.topology;
    for (s, chain) in data.workload.chains.iter().enumerate() {
        let options = &data.catalog.chains[s].options;
        let cand = &data.candidates[s];
        for o in 0..options.len() {
            b.binary(VarKey::RouteChain { chain: s, option: o });
        }
        for d in 0..chain.demands.len() {
            for o in 0..options.len() {
                b.binary(VarKey::RouteDemand { chain: s, demand: d, option: o });
            }
        }
        for v in 0..chain.vnfs.len() {
            for &x in cand {
                b.binary(VarKey::Place { chain: s, vnf: v, server: x });
                for d in 0..chain.demands.len() {
                    b.binary(VarKey::Use { chain: s, vnf: v, server: x, demand: d });
                }
            }
        }
        for v in 0..chain.vnfs.len() {
            for &x in cand {
                b.unit(VarKey::VnfUtil { chain: s, vnf: v, server: x });
            }
        }
    }
    for x in &topo.servers {
        b.unit(VarKey::ServerUtil { server: x.id });
    }
    for l in &topo.links {
        b.unit(VarKey::LinkUtil { link: l.id });
    }

    let mut link_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); topo.links.len()];
    let mut server_terms: Vec<Vec<(usize, f64)>> = vec![Vec::new(); topo.servers.len()];

    for (s, chain) in data.workload.chains.iter().enumerate() {
        let options = &data.catalog.chains[s].options;
        let cand = &data.candidates[s];
        let nd = chain.demands.len();
        let rc = |b: &Builder, o| b.at(VarKey::RouteChain { chain: s, option: o });
        let rd = |b: &Builder, d, o| b.at(VarKey::RouteDemand { chain: s, demand: d, option: o });
        let fu = |b: &Builder, v, x, d| b.at(VarKey::Use { chain: s, vnf: v, server: x, demand: d });
        let f = |b: &Builder, v, x| b.at(VarKey::Place { chain: s, vnf: v, server: x });

        for d in 0..nd {
            let terms = (0..options.len()).map(|o| (rd(b, d, o), 1.0)).collect();
            b.row(format!("eq14_s{s}_d{d}"), terms, Sense::Eq, 1.0);
        }
        for o in 0..options.len() {
            for d in 0..nd {
                let t = vec![(rd(b, d, o), 1.0), (rc(b, o), -1.0)];
                b.row(format!("eq15a_s{s}_d{d}_p{o}"), t, Sense::Le, 0.0);
            }
            let mut t = vec![(rc(b, o), 1.0)];
            t.extend((0..nd).map(|d| (rd(b, d, o), -1.0)));
            b.row(format!("eq15b_s{s}_p{o}"), t, Sense::Le, 0.0);
        }
        for (o, opt) in options.iter().enumerate() {
            for d in 0..nd {
                let path = opt.path(d);
                let servers = path_servers(topo, path);
                for v in 0..chain.vnfs.len() {
                    let mut t = vec![(rd(b, d, o), 1.0)];
                    t.extend(servers.iter().map(|&x| (fu(b, v, x, d), -1.0)));
                    b.row(format!("eq16_s{s}_d{d}_p{o}_v{v}"), t, Sense::Le, 0.0);
                }
                let prec = precedence_sets(topo, path);
                for v in 1..chain.vnfs.len() {
                    for (x, prefix) in &prec {
                        let mut t: Vec<(usize, f64)> = prefix.iter().map(|&y| (fu(b, v - 1, y, d), 1.0)).collect();
                        t.push((fu(b, v, *x, d), -1.0));
                        t.push((rd(b, d, o), -1.0));
                        b.row(format!("eq19_s{s}_d{d}_p{o}_v{v}_x{}", x.0), t, Sense::Ge, -1.0);
                    }
                }
                let bw = chain.demands[d].bandwidth;
                for &l in &path.links {
                    let cap = topo.link(l).capacity;
                    link_terms[l.0].push((rd(b, d, o), -bw / cap));
                }
            }
        }
        for v in 0..chain.vnfs.len() {
            for d in 0..nd {
                let t = cand.iter().map(|&x| (fu(b, v, x, d), 1.0)).collect();
                b.row(format!("eq17_s{s}_v{v}_d{d}"), t, Sense::Eq, 1.0);
            }
        }
        for v in 0..chain.vnfs.len() {
            for &x in cand {
                for d in 0..nd {
                    let t = vec![(fu(b, v, x, d), 1.0), (f(b, v, x), -1.0)];
                    b.row(format!("eq18a_s{s}_v{v}_x{}_d{d}", x.0), t, Sense::Le, 0.0);
                }
                let mut t = vec![(f(b, v, x), 1.0)];
                t.extend((0..nd).map(|d| (fu(b, v, x, d), -1.0)));
                b.row(format!("eq18b_s{s}_v{v}_x{}", x.0), t, Sense::Le, 0.0);
            }
        }
        for (v, vnf) in chain.vnfs.iter().enumerate() {
            for &x in cand {
                let cap = topo.server(x).capacity;
                let uv = b.at(VarKey::VnfUtil { chain: s, vnf: v, server: x });
                let mut t = vec![(uv, 1.0)];
                t.extend((0..nd).map(|d| (fu(b, v, x, d), -chain.demands[d].bandwidth * vnf.load_ratio / cap)));
                b.row(format!("eq11_s{s}_v{v}_x{}", x.0), t, Sense::Eq, 0.0);

                // overhead only on instances absent from the initial placement
                match overhead {
                    Some((init, e_r)) if !init.placed(s, v, x) => {
                        server_terms[x.0].push((uv, -(1.0 + e_r)));
                        server_terms[x.0].push((f(b, v, x), -1.0 / (cap * e_r)));
                    }
                    _ => server_terms[x.0].push((uv, -1.0)),
                }
            }
        }
    }

    for x in &topo.servers {
        let mut t = vec![(b.at(VarKey::ServerUtil { server: x.id }), 1.0)];
        t.append(&mut server_terms[x.id.0]);
        b.row(format!("eq10_x{}", x.id.0), t, Sense::Eq, 0.0);
    }
    for l in &topo.links {
        let mut t = vec![(b.at(VarKey::LinkUtil { link: l.id }), 1.0)];
        t.append(&mut link_terms[l.id.0]);
        b.row(format!("eq13_l{}", l.id.0), t, Sense::Eq, 0.0);
    }
}

fn single_path_rows(b: &mut Builder, data: &ModelData) {
    for (s, chain) in data.workload.chains.iter().enumerate() {
        let n = data.catalog.chains[s].options.len();
        let t = (0..n).map(|o| (b.at(VarKey::RouteChain { chain: s, option: o }), 1.0)).collect();
        b.row(format!("eq5_s{s}"), t, Sense::Eq, 1.0);
        for v in 0..chain.vnfs.len() {
            let t = data.candidates[s]
                .iter()
                .map(|&x| (b.at(VarKey::Place { chain: s, vnf: v, server: x }), 1.0))
                .collect();
            b.row(format!("one_s{s}_v{v}"), t, Sense::Le, 1.0);
        }
    }
}

fn finish(b: Builder, objective: Vec<(usize, f64)>, meta: ModelMeta, data: ModelData) -> ModelInstance {
    ModelInstance { variables: b.variables, constraints: b.constraints, objective, meta, data, index: b.index }
}

fn check_inputs(topology: &Topology, workload: &Workload, catalog: &RouteCatalog) -> Result<()> {
    workload.validate(topology)?;
    catalog.check_against(workload)
}

/// Pre-optimization minimizing the number of used servers.
pub fn build_initial_placement_model(
    topology: &Topology,
    workload: &Workload,
    catalog: &RouteCatalog,
) -> Result<ModelInstance> {
    check_inputs(topology, workload, catalog)?;
    let data = ModelData {
        topology: topology.clone(),
        workload: workload.clone(),
        catalog: catalog.clone(),
        initial: None,
        costs: CostFunctionSet::default(),
        candidates: candidates(topology, catalog, workload),
    };
    let mut b = Builder::new(catalog.routing);
    common_rows(&mut b, &data, None);
    single_path_rows(&mut b, &data);

    let mut objective = Vec::new();
    for x in &topology.servers {
        let z = b.binary(VarKey::UsedServer { server: x.id });
        objective.push((z, 1.0));
    }
    for (s, chain) in workload.chains.iter().enumerate() {
        for v in 0..chain.vnfs.len() {
            for &x in &data.candidates[s] {
                let t = vec![
                    (b.at(VarKey::Place { chain: s, vnf: v, server: x }), 1.0),
                    (b.at(VarKey::UsedServer { server: x }), -1.0),
                ];
                b.row(format!("used_s{s}_v{v}_x{}", x.0), t, Sense::Le, 0.0);
            }
        }
    }
    let meta = ModelMeta { kind: ModelKind::Initial, routing: catalog.routing, params: MethodParams::default() };
    Ok(finish(b, objective, meta, data))
}

/// Re-optimization model for one method and routing variant.
#[allow(clippy::too_many_arguments)]
pub fn build_main_model(
    topology: &Topology,
    workload: &Workload,
    catalog: &RouteCatalog,
    initial: &InitialPlacement,
    method: Method,
    routing: Routing,
    params: MethodParams,
    costs: &CostFunctionSet,
) -> Result<ModelInstance> {
    check_inputs(topology, workload, catalog)?;
    if catalog.routing != routing {
        return Err(Error::invalid(
            "routing",
            format!("catalog is {:?}, model requested {routing:?}", catalog.routing),
        ));
    }
    params.validate()?;
    costs.validate()?;
    initial.validate(topology, workload)?;

    let data = ModelData {
        topology: topology.clone(),
        workload: workload.clone(),
        catalog: catalog.clone(),
        initial: Some(initial.clone()),
        costs: costs.clone(),
        candidates: candidates(topology, catalog, workload),
    };
    let mut params = params;
    if method == Method::Migration {
        params.r_max = 0;
    }

    let mut b = Builder::new(routing);
    let overhead = method.allows_replicas().then_some((initial, params.e_r));
    common_rows(&mut b, &data, overhead);

    match method {
        Method::Migration => single_path_rows(&mut b, &data),
        Method::Replication | Method::Combined => {
            for (s, chain) in workload.chains.iter().enumerate() {
                let n = catalog.chains[s].options.len();
                let r_max = params.r_max.min(data.candidates[s].len()) as f64;
                let routes: Vec<(usize, f64)> =
                    (0..n).map(|o| (b.at(VarKey::RouteChain { chain: s, option: o }), 1.0)).collect();
                b.row(format!("eq6a_s{s}"), routes.clone(), Sense::Ge, 1.0);
                b.row(format!("eq6b_s{s}"), routes.clone(), Sense::Le, r_max + 1.0);
                for (v, vnf) in chain.vnfs.iter().enumerate() {
                    let rv = f64::from(u8::from(vnf.replicable));
                    let mut t: Vec<(usize, f64)> = data.candidates[s]
                        .iter()
                        .map(|&x| (b.at(VarKey::Place { chain: s, vnf: v, server: x }), 1.0))
                        .collect();
                    if rv > 0.0 {
                        t.extend(routes.iter().map(|&(j, _)| (j, -rv)));
                    }
                    b.row(format!("eq7_s{s}_v{v}"), t, Sense::Le, 1.0 - rv);
                }
            }
        }
    }
    if method == Method::Replication {
        for (s, chain) in workload.chains.iter().enumerate() {
            for v in 0..chain.vnfs.len() {
                let x = initial.chains[s].vnf_servers[v];
                if let Some(j) = b.get(VarKey::Place { chain: s, vnf: v, server: x }) {
                    b.row(format!("pin_s{s}_v{v}_x{}", x.0), vec![(j, 1.0)], Sense::Ge, 1.0);
                }
            }
        }
    }

    // cost epigraphs
    let mut objective = Vec::new();
    let nv = workload.total_vnfs().max(1) as f64;
    let nx = topology.servers.len().max(1) as f64;
    let nl = topology.links.len().max(1) as f64;
    for (s, chain) in workload.chains.iter().enumerate() {
        for v in 0..chain.vnfs.len() {
            let kv = b.nonneg(VarKey::MigrationCost { chain: s, vnf: v });
            objective.push((kv, params.alpha / nv));
            let x = initial.chains[s].vnf_servers[v];
            let c = params.e_m * initial.utilization(topology, workload, s, v, x);
            let f = b.get(VarKey::Place { chain: s, vnf: v, server: x });
            for (i, seg) in costs.segments.iter().enumerate() {
                let mut t = vec![(kv, 1.0)];
                if let Some(f) = f {
                    t.push((f, seg.slope * c));
                }
                b.row(format!("eq2_s{s}_v{v}_x{}_y{i}", x.0), t, Sense::Ge, seg.slope * c - seg.intercept);
            }
        }
    }
    for x in &topology.servers {
        let kx = b.nonneg(VarKey::ServerCost { server: x.id });
        objective.push((kx, (1.0 - params.alpha) / nx));
        let ux = b.at(VarKey::ServerUtil { server: x.id });
        for (i, seg) in costs.segments.iter().enumerate() {
            b.row(format!("eq8_x{}_y{i}", x.id.0), vec![(kx, 1.0), (ux, -seg.slope)], Sense::Ge, -seg.intercept);
        }
    }
    for l in &topology.links {
        let kl = b.nonneg(VarKey::LinkCost { link: l.id });
        objective.push((kl, params.beta / nl));
        let ul = b.at(VarKey::LinkUtil { link: l.id });
        for (i, seg) in costs.segments.iter().enumerate() {
            b.row(format!("eq9_l{}_y{i}", l.id.0), vec![(kl, 1.0), (ul, -seg.slope)], Sense::Ge, -seg.intercept);
        }
    }

    let meta = ModelMeta { kind: ModelKind::Main(method), routing, params };
    Ok(finish(b, objective, meta, data))
}
