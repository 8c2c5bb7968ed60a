//! Route options as the model sees them.
//!
//! An option is one SDN path (shared by all demands of the chain) or one
//! ECMP subset (one pre-selected path per demand). Both routing variants
//! generate the same constraint families over options.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paths::{self, Alternative, EcmpCatalog, Path, SdnCatalog};
use crate::topology::{NodeId, ServerId, Topology};
use crate::workload::Workload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Routing {
    Ecmp,
    Sdn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOption {
    pub label: String,
    /// Either one path for every demand, or exactly one per demand.
    pub paths: Vec<Path>,
    #[serde(default)]
    pub baseline: bool,
}

impl RouteOption {
    pub fn path(&self, demand: usize) -> &Path {
        if self.paths.len() == 1 {
            &self.paths[0]
        } else {
            &self.paths[demand]
        }
    }

    /// Service-node sequence seen by `demand`.
    pub fn service_nodes(&self, demand: usize) -> &[NodeId] {
        &self.path(demand).service_nodes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRoutes {
    pub options: Vec<RouteOption>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteCatalog {
    pub routing: Routing,
    pub chains: Vec<ChainRoutes>,
}

impl RouteCatalog {
    pub fn from_sdn(catalog: &SdnCatalog) -> Self {
        let chains = catalog
            .chains
            .iter()
            .map(|c| ChainRoutes {
                options: c
                    .paths
                    .iter()
                    .enumerate()
                    .map(|(i, p)| RouteOption { label: format!("p{i}"), paths: vec![p.clone()], baseline: false })
                    .collect(),
            })
            .collect();
        RouteCatalog { routing: Routing::Sdn, chains }
    }

    pub fn from_ecmp(topo: &Topology, catalog: &EcmpCatalog) -> Self {
        let chains = catalog
            .chains
            .iter()
            .map(|c| ChainRoutes {
                options: c
                    .subsets
                    .iter()
                    .map(|s| RouteOption {
                        label: match s.alternative {
                            Alternative::Baseline => "baseline".to_string(),
                            Alternative::Move { vnf, node } => format!("v{vnf}@{}", topo.node(node).name),
                        },
                        paths: s.paths.clone(),
                        baseline: s.alternative == Alternative::Baseline,
                    })
                    .collect(),
            })
            .collect();
        RouteCatalog { routing: Routing::Ecmp, chains }
    }

    /// Route skeletons with hashed ECMP segments per demand. This is what an
    /// ECMP fabric offers before any placement exists.
    pub fn ecmp_skeletons(topo: &Topology, workload: &Workload, max_intermediate: usize, seed: u64) -> Result<Self> {
        let mut chains = Vec::with_capacity(workload.chains.len());
        for c in &workload.chains {
            let mut options = Vec::new();
            for skeleton in paths::build_route_set(topo, c.source, c.destination, max_intermediate) {
                let routes: Option<Vec<Path>> =
                    (0..c.demands.len()).map(|d| paths::ecmp_route(topo, &skeleton, c.id, d, seed)).collect();
                if let Some(routes) = routes {
                    let label = skeleton.iter().map(|&n| topo.node(n).name.as_str()).collect::<Vec<_>>().join("-");
                    options.push(RouteOption { label, paths: routes, baseline: false });
                }
            }
            chains.push(ChainRoutes { options });
        }
        Ok(RouteCatalog { routing: Routing::Ecmp, chains })
    }

    pub fn check_against(&self, workload: &Workload) -> Result<()> {
        if self.chains.len() != workload.chains.len() {
            return Err(Error::invalid("catalog", "chain count differs from workload"));
        }
        for (routes, chain) in self.chains.iter().zip(&workload.chains) {
            if routes.options.is_empty() {
                return Err(Error::invalid("catalog", format!("chain {} has no route", chain.id)));
            }
            for o in &routes.options {
                if o.paths.len() != 1 && o.paths.len() != chain.demands.len() {
                    return Err(Error::invalid("catalog", format!("option {} has wrong path count", o.label)));
                }
                for d in 0..chain.demands.len() {
                    let p = o.path(d);
                    if p.source() != chain.source || p.destination() != chain.destination {
                        return Err(Error::invalid("catalog", format!("option {} has wrong endpoints", o.label)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Servers hosted on the service nodes of `path`, each once, in path order.
pub fn path_servers(topo: &Topology, path: &Path) -> Vec<ServerId> {
    let mut out = Vec::new();
    for &n in &path.service_nodes {
        for &s in &topo.node(n).servers {
            if !out.contains(&s) {
                out.push(s);
            }
        }
    }
    out
}

/// For each server on the path, the servers that may host the previous VNF:
/// those on any node whose first visit is no later than the last visit of the
/// server's own node.
pub fn precedence_sets(topo: &Topology, path: &Path) -> Vec<(ServerId, Vec<ServerId>)> {
    let seq = &path.service_nodes;
    let first = |n: NodeId| seq.iter().position(|&m| m == n).unwrap();
    let last = |n: NodeId| seq.iter().rposition(|&m| m == n).unwrap();
    let mut nodes: Vec<NodeId> = Vec::new();
    for &n in seq {
        if !nodes.contains(&n) {
            nodes.push(n);
        }
    }
    let mut out = Vec::new();
    for &n in &nodes {
        let limit = last(n);
        let prefix: Vec<ServerId> =
            nodes.iter().filter(|&&m| first(m) <= limit).flat_map(|&m| topo.node(m).servers.iter().copied()).collect();
        for &x in &topo.node(n).servers {
            out.push((x, prefix.clone()));
        }
    }
    out
}
