//! Service chains, traffic demands, and the seeded experiment generators.

use std::path::Path;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{NodeId, NodeKind, Topology};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VnfType {
    pub name: String,
    pub load_ratio: f64,
    pub replicable: bool,
}

impl VnfType {
    pub fn new(name: impl Into<String>, load_ratio: f64, replicable: bool) -> Self {
        VnfType { name: name.into(), load_ratio, replicable }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficDemand {
    pub id: usize,
    /// Gbps.
    pub bandwidth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceChain {
    pub id: usize,
    pub source: NodeId,
    pub destination: NodeId,
    pub vnfs: Vec<VnfType>,
    pub demands: Vec<TrafficDemand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Workload {
    pub chains: Vec<ServiceChain>,
    pub rng_seed: u64,
}

/// Closed interval `[low, high]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub low: T,
    pub high: T,
}

impl<T: PartialOrd + Copy + std::fmt::Display> Interval<T> {
    pub const fn new(low: T, high: T) -> Self {
        Interval { low, high }
    }

    pub fn check(&self, name: &'static str, positive: impl Fn(T) -> bool) -> Result<()> {
        if !positive(self.low) {
            return Err(Error::invalid(name, format!("lower bound {} must be positive", self.low)));
        }
        if self.low > self.high {
            return Err(Error::invalid(name, format!("[{}, {}] is reversed", self.low, self.high)));
        }
        Ok(())
    }

    pub fn contains(&self, v: T) -> bool {
        self.low <= v && v <= self.high
    }
}

/// Which ordered (source, destination) service-node pairs get a chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairSelection {
    All,
    Sampled(usize),
    Explicit(Vec<(NodeId, NodeId)>),
}

pub fn fat_tree_sfc() -> Vec<VnfType> {
    vec![VnfType::new("vnf1", 0.2, false), VnfType::new("vnf2", 1.0, true), VnfType::new("vnf3", 0.2, false)]
}

pub fn leaf_spine_sfc() -> Vec<VnfType> {
    vec![VnfType::new("vnf1", 0.4, false), VnfType::new("vnf2", 0.9, true), VnfType::new("vnf3", 0.4, false)]
}

pub const FAT_TREE_DEMANDS: Interval<usize> = Interval::new(10, 20);
pub const FAT_TREE_BANDWIDTH: Interval<f64> = Interval::new(1.0, 30.0);
pub const LEAF_SPINE_CHAINS_PER_DIRECTION: usize = 3;
pub const LEAF_SPINE_DEMANDS: Interval<usize> = Interval::new(6, 12);
pub const LEAF_SPINE_BANDWIDTH: Interval<f64> = Interval::new(70.0, 110.0);

fn check_sfc(sfc: &[VnfType]) -> Result<()> {
    if sfc.is_empty() {
        return Err(Error::invalid("sfc", "needs at least one VNF"));
    }
    for v in sfc {
        if !(v.load_ratio.is_finite() && v.load_ratio > 0.0) {
            return Err(Error::invalid("sfc", format!("{} has non-positive load ratio", v.name)));
        }
    }
    Ok(())
}

/// Bandwidth drawn uniformly on a 0.1 Gbps grid.
fn draw_bandwidth(rng: &mut ChaCha8Rng, bw: Interval<f64>) -> f64 {
    let lo = (bw.low * 10.0).round() as i64;
    let hi = (bw.high * 10.0).round() as i64;
    rng.gen_range(lo..=hi) as f64 / 10.0
}

fn make_chain(
    rng: &mut ChaCha8Rng,
    id: usize,
    source: NodeId,
    destination: NodeId,
    demands: Interval<usize>,
    bandwidth: Interval<f64>,
    sfc: &[VnfType],
) -> ServiceChain {
    let n = rng.gen_range(demands.low..=demands.high);
    let demands = (0..n).map(|i| TrafficDemand { id: i, bandwidth: draw_bandwidth(rng, bandwidth) }).collect();
    ServiceChain { id, source, destination, vnfs: sfc.to_vec(), demands }
}

pub fn generate_fat_tree_workload(
    topo: &Topology,
    pairs: &PairSelection,
    demands_per_pair: Interval<usize>,
    bandwidth: Interval<f64>,
    sfc: &[VnfType],
    rng_seed: u64,
) -> Result<Workload> {
    demands_per_pair.check("demands_per_pair", |v| v > 0)?;
    bandwidth.check("bandwidth", |v| v > 0.0)?;
    check_sfc(sfc)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);

    let service = topo.service_nodes();
    let all: Vec<(NodeId, NodeId)> =
        service.iter().flat_map(|&a| service.iter().filter(move |&&b| b != a).map(move |&b| (a, b))).collect();
    let selected = match pairs {
        PairSelection::All => all,
        PairSelection::Sampled(k) => {
            let mut idx = sample(&mut rng, all.len(), (*k).min(all.len())).into_vec();
            idx.sort_unstable();
            idx.into_iter().map(|i| all[i]).collect()
        }
        PairSelection::Explicit(list) => {
            for &(a, b) in list {
                for n in [a, b] {
                    if !topo.nodes.get(n.0).is_some_and(|x| x.kind.is_service()) {
                        return Err(Error::invalid("pairs", format!("node {} is not a service node", n.0)));
                    }
                }
            }
            list.clone()
        }
    };

    let chains = selected
        .into_iter()
        .enumerate()
        .map(|(id, (a, b))| make_chain(&mut rng, id, a, b, demands_per_pair, bandwidth, sfc))
        .collect();
    Ok(Workload { chains, rng_seed })
}

/// Chains between the first and the last leaf, in both directions.
pub fn generate_leaf_spine_workload(
    topo: &Topology,
    chains_per_direction: usize,
    demands_per_chain: Interval<usize>,
    bandwidth: Interval<f64>,
    sfc: &[VnfType],
    rng_seed: u64,
) -> Result<Workload> {
    demands_per_chain.check("demands_per_chain", |v| v > 0)?;
    bandwidth.check("bandwidth", |v| v > 0.0)?;
    check_sfc(sfc)?;
    let leaves = topo.nodes_of_kind(NodeKind::Leaf);
    let (first, last) = match (leaves.first(), leaves.last()) {
        (Some(&f), Some(&l)) if f != l => (f, l),
        _ => return Err(Error::invalid("topology", "needs at least two leaves")),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut chains = Vec::with_capacity(2 * chains_per_direction);
    for (a, b) in [(first, last), (last, first)] {
        for _ in 0..chains_per_direction {
            let id = chains.len();
            chains.push(make_chain(&mut rng, id, a, b, demands_per_chain, bandwidth, sfc));
        }
    }
    Ok(Workload { chains, rng_seed })
}

impl Workload {
    pub fn validate(&self, topo: &Topology) -> Result<()> {
        for (i, c) in self.chains.iter().enumerate() {
            if c.id != i {
                return Err(Error::invalid("chains", format!("chain id {} at position {i}", c.id)));
            }
            check_sfc(&c.vnfs)?;
            if c.demands.is_empty() {
                return Err(Error::invalid("chains", format!("chain {i} has no demands")));
            }
            if c.demands.iter().any(|d| !(d.bandwidth.is_finite() && d.bandwidth > 0.0)) {
                return Err(Error::invalid("chains", format!("chain {i} has a non-positive demand")));
            }
            for n in [c.source, c.destination] {
                if !topo.nodes.get(n.0).is_some_and(|x| x.kind.is_service()) {
                    return Err(Error::invalid("chains", format!("chain {i} endpoint {} is not a service node", n.0)));
                }
            }
        }
        Ok(())
    }

    pub fn total_vnfs(&self) -> usize {
        self.chains.iter().map(|c| c.vnfs.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("workload serializes")
    }

    pub fn store(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Workload> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Format { path: path.into(), reason: e.to_string() })
    }
}
