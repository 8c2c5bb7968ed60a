#![allow(dead_code)]

pub mod lp_grammar;
pub mod oracle;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use vnfplace::costs::CostFunctionSet;
use vnfplace::model::{
    build_initial_placement_model, build_main_model, InitialPlacement, Method, MethodParams, ModelInstance,
    RouteCatalog, Routing,
};
use vnfplace::paths::{build_ecmp_catalog, build_sdn_catalog, EcmpOptions, DEFAULT_CATALOG_CAP};
use vnfplace::solve::{solve_exact, verify, SolveBudget};
use vnfplace::topology::{build_fat_tree, build_leaf_spine, NodeKind, Topology};
use vnfplace::workload::{fat_tree_sfc, leaf_spine_sfc, ServiceChain, TrafficDemand, Workload};

/// A scenario small enough for exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct TinyCase {
    pub topology: Topology,
    pub workload: Workload,
    pub catalog: RouteCatalog,
    pub initial: InitialPlacement,
    pub routing: Routing,
}

impl TinyCase {
    pub fn model(&self, method: Method, alpha: f64) -> ModelInstance {
        let params = MethodParams { alpha, ..MethodParams::default() };
        build_main_model(
            &self.topology,
            &self.workload,
            &self.catalog,
            &self.initial,
            method,
            self.routing,
            params,
            &CostFunctionSet::default(),
        )
        .expect("tiny model builds")
    }
}

fn bandwidth(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo..=hi) * 10.0).round() / 10.0
}

fn chains(
    rng: &mut ChaCha8Rng,
    ends: &[(vnfplace::topology::NodeId, vnfplace::topology::NodeId)],
    max_total: usize,
    bw: (f64, f64),
    sfc: &[vnfplace::workload::VnfType],
) -> Vec<ServiceChain> {
    let mut left = max_total;
    let mut out = Vec::new();
    for (id, &(a, b)) in ends.iter().enumerate() {
        let remaining_chains = ends.len() - id - 1;
        let n = rng.gen_range(1..=(left - remaining_chains).min(2));
        left -= n;
        let demands = (0..n).map(|d| TrafficDemand { id: d, bandwidth: bandwidth(rng, bw.0, bw.1) }).collect();
        out.push(ServiceChain { id, source: a, destination: b, vnfs: sfc.to_vec(), demands });
    }
    out
}

fn initial_placement(topology: &Topology, workload: &Workload, catalog: &RouteCatalog) -> Option<InitialPlacement> {
    let model = build_initial_placement_model(topology, workload, catalog).ok()?;
    let sol = solve_exact(&model, &SolveBudget::default());
    if !sol.status.has_solution() || !verify(&model, &sol.assignment).feasible {
        return None;
    }
    InitialPlacement::from_decisions(&model.decisions(&sol.assignment).ok()?).ok()
}

/// Leaf-spine with 2 leaves and 1 or 2 spines (at most 4 service nodes),
/// 1 or 2 chains, at most 4 demands. Returns `None` when the seed draws an
/// instance whose initial placement does not fit.
pub fn tiny_sdn(seed: u64) -> Option<TinyCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spines = rng.gen_range(1..=2);
    let per_leaf = rng.gen_range(1..=2);
    let topology = build_leaf_spine(2, spines, per_leaf, 100.0, 200.0).ok()?;
    let leaves = topology.nodes_of_kind(NodeKind::Leaf);
    let nchains = rng.gen_range(1..=2);
    let ends: Vec<_> =
        (0..nchains).map(|i| if i == 0 { (leaves[0], leaves[1]) } else { (leaves[1], leaves[0]) }).collect();
    let max_total = if per_leaf == 2 && spines == 2 { 3 } else { 4 };
    let chains = chains(&mut rng, &ends, max_total, (5.0, 45.0), &leaf_spine_sfc());
    let workload = Workload { chains, rng_seed: seed };
    let catalog = RouteCatalog::from_sdn(&build_sdn_catalog(&topology, &workload.chains, 0, DEFAULT_CATALOG_CAP).ok()?);
    let initial = initial_placement(&topology, &workload, &catalog)?;
    Some(TinyCase { topology, workload, catalog, initial, routing: Routing::Sdn })
}

/// Two-pod fat-tree with ECMP route subsets, 1 or 2 chains between the
/// TORs, at most 3 demands.
pub fn tiny_ecmp(seed: u64) -> Option<TinyCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let per_tor = rng.gen_range(1..=2);
    let topology = build_fat_tree(2, per_tor, 100.0, 200.0).ok()?;
    let tors = topology.nodes_of_kind(NodeKind::Tor);
    let nchains = rng.gen_range(1..=2);
    let ends: Vec<_> = (0..nchains).map(|i| if i == 0 { (tors[0], tors[1]) } else { (tors[1], tors[0]) }).collect();
    let chains = chains(&mut rng, &ends, 3, (2.0, 40.0), &fat_tree_sfc());
    let workload = Workload { chains, rng_seed: seed };
    let hash_seed = seed.wrapping_mul(31).wrapping_add(7);
    let skeletons = RouteCatalog::ecmp_skeletons(&topology, &workload, 1, hash_seed).ok()?;
    let initial = initial_placement(&topology, &workload, &skeletons)?;
    let ecmp = build_ecmp_catalog(
        &topology,
        &workload.chains,
        &initial.vnf_nodes(&topology),
        &EcmpOptions::default(),
        hash_seed,
    )
    .ok()?;
    let catalog = RouteCatalog::from_ecmp(&topology, &ecmp);
    Some(TinyCase { topology, workload, catalog, initial, routing: Routing::Ecmp })
}

/// First `count` seeds from `start` that produce a case.
pub fn suite(count: usize, start: u64, make: fn(u64) -> Option<TinyCase>) -> Vec<TinyCase> {
    (start..).filter_map(make).take(count).collect()
}
