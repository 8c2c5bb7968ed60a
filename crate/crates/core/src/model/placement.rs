use serde::{Deserialize, Serialize};

use super::{ModelInstance, ModelKind, VarKey};
use crate::error::{Error, Result};
use crate::topology::{NodeId, ServerId, Topology};
use crate::workload::Workload;

/// Where one chain ran before re-optimization: one server per VNF, shared by
/// all of the chain's demands, along route option `route`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainPlacement {
    pub route: usize,
    pub vnf_servers: Vec<ServerId>,
}

/// The `F` parameters of the re-optimization models.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialPlacement {
    pub chains: Vec<ChainPlacement>,
}

impl InitialPlacement {
    /// `F_x^{v,s}`.
    pub fn placed(&self, chain: usize, vnf: usize, server: ServerId) -> bool {
        self.chains[chain].vnf_servers[vnf] == server
    }

    /// `F_{x,lambda}^{v,s}`; every demand uses the single initial instance.
    pub fn used(&self, chain: usize, vnf: usize, server: ServerId, _demand: usize) -> bool {
        self.placed(chain, vnf, server)
    }

    /// Initial VNF utilization on `server`: sum of `lambda * F * L_v / C_x`.
    pub fn utilization(&self, topo: &Topology, workload: &Workload, chain: usize, vnf: usize, server: ServerId) -> f64 {
        let c = &workload.chains[chain];
        let cap = topo.server(server).capacity;
        (0..c.demands.len())
            .filter(|&d| self.used(chain, vnf, server, d))
            .map(|d| c.demands[d].bandwidth * c.vnfs[vnf].load_ratio / cap)
            .sum()
    }

    pub fn vnf_nodes(&self, topo: &Topology) -> Vec<Vec<NodeId>> {
        self.chains.iter().map(|c| c.vnf_servers.iter().map(|&x| topo.server(x).node).collect()).collect()
    }

    pub fn validate(&self, topo: &Topology, workload: &Workload) -> Result<()> {
        if self.chains.len() != workload.chains.len() {
            return Err(Error::invalid("initial_placement", "chain count differs from workload"));
        }
        for (c, chain) in self.chains.iter().zip(&workload.chains) {
            if c.vnf_servers.len() != chain.vnfs.len() {
                return Err(Error::invalid("initial_placement", format!("chain {} VNF count differs", chain.id)));
            }
            if c.vnf_servers.iter().any(|x| x.0 >= topo.servers.len()) {
                return Err(Error::invalid("initial_placement", format!("chain {} uses an unknown server", chain.id)));
            }
        }
        Ok(())
    }

    /// Reads the placement off a solved initial-placement model.
    pub fn from_decisions(decisions: &Decisions) -> Result<Self> {
        let mut chains = Vec::with_capacity(decisions.chains.len());
        for (s, c) in decisions.chains.iter().enumerate() {
            let route = *c
                .routes
                .first()
                .ok_or_else(|| Error::invalid("initial_placement", format!("chain {s} has no demands")))?;
            if c.routes.iter().any(|&r| r != route) {
                return Err(Error::invalid("initial_placement", format!("chain {s} uses several routes")));
            }
            let vnf_servers = c.servers[0].clone();
            if c.servers.iter().any(|sv| *sv != vnf_servers) {
                return Err(Error::invalid("initial_placement", format!("chain {s} has replicated VNFs")));
            }
            chains.push(ChainPlacement { route, vnf_servers });
        }
        Ok(InitialPlacement { chains })
    }
}

/// Independent choices of a solution: per demand, the route option and the
/// server of every VNF. All other variables follow from these.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainDecision {
    pub routes: Vec<usize>,
    /// `servers[demand][vnf]`.
    pub servers: Vec<Vec<ServerId>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decisions {
    pub chains: Vec<ChainDecision>,
}

/// Instance sets: `chains[s][v]` lists the servers hosting VNF `v` of `s`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub chains: Vec<Vec<Vec<ServerId>>>,
}

impl Placement {
    pub fn from_decisions(decisions: &Decisions, vnfs_per_chain: &[usize]) -> Placement {
        let chains = decisions
            .chains
            .iter()
            .zip(vnfs_per_chain)
            .map(|(c, &nv)| {
                (0..nv)
                    .map(|v| {
                        let mut xs: Vec<ServerId> = c.servers.iter().map(|sv| sv[v]).collect();
                        xs.sort_unstable();
                        xs.dedup();
                        xs
                    })
                    .collect()
            })
            .collect();
        Placement { chains }
    }
}

/// Sum over chains and VNFs of `F (1 - f)`.
pub fn count_migrations(initial: &InitialPlacement, placement: &Placement) -> usize {
    initial
        .chains
        .iter()
        .zip(&placement.chains)
        .map(|(init, now)| init.vnf_servers.iter().zip(now).filter(|(x, set)| !set.contains(x)).count())
        .sum()
}

/// Sum over chains and VNFs of `max(0, instances - 1)`.
pub fn count_replicas(placement: &Placement) -> usize {
    placement.chains.iter().flatten().map(|set| set.len().saturating_sub(1)).sum()
}

impl ModelInstance {
    /// Recovers the independent choices from a 0/1 assignment.
    pub fn decisions(&self, x: &[f64]) -> Result<Decisions> {
        let d = &self.data;
        let mut chains = Vec::with_capacity(d.workload.chains.len());
        for (s, chain) in d.workload.chains.iter().enumerate() {
            let nopt = d.catalog.chains[s].options.len();
            let mut routes = Vec::with_capacity(chain.demands.len());
            let mut servers = Vec::with_capacity(chain.demands.len());
            for dm in 0..chain.demands.len() {
                let o = (0..nopt)
                    .find(|&o| self.value(x, VarKey::RouteDemand { chain: s, demand: dm, option: o }) > 0.5)
                    .ok_or_else(|| Error::Infeasible(format!("demand {dm} of chain {s} has no route")))?;
                routes.push(o);
                let mut per = Vec::with_capacity(chain.vnfs.len());
                for v in 0..chain.vnfs.len() {
                    let srv = d.candidates[s]
                        .iter()
                        .copied()
                        .find(|&srv| self.value(x, VarKey::Use { chain: s, vnf: v, server: srv, demand: dm }) > 0.5)
                        .ok_or_else(|| Error::Infeasible(format!("demand {dm} of chain {s} skips VNF {v}")))?;
                    per.push(srv);
                }
                servers.push(per);
            }
            chains.push(ChainDecision { routes, servers });
        }
        Ok(Decisions { chains })
    }

    pub fn placement(&self, decisions: &Decisions) -> Placement {
        let nv: Vec<usize> = self.data.workload.chains.iter().map(|c| c.vnfs.len()).collect();
        Placement::from_decisions(decisions, &nv)
    }

    /// Fills every variable from the independent choices: indicator
    /// variables as ORs, utilizations from their definitions, and costs as
    /// the cheapest values their epigraph rows allow.
    pub fn complete(&self, decisions: &Decisions) -> Vec<f64> {
        let d = &self.data;
        let topo = &d.topology;
        let mut x = vec![0.0; self.variables.len()];
        let set = |x: &mut Vec<f64>, key: VarKey, val: f64| {
            if let Some(j) = self.var(&key) {
                x[j] = val;
            }
        };
        let mut server_util = vec![0.0; topo.servers.len()];
        let mut link_util = vec![0.0; topo.links.len()];
        let overhead = self.method().is_some_and(|m| m.allows_replicas());
        let e_r = self.meta.params.e_r;

        for (s, (chain, dec)) in d.workload.chains.iter().zip(&decisions.chains).enumerate() {
            let options = &d.catalog.chains[s].options;
            for (dm, &o) in dec.routes.iter().enumerate() {
                set(&mut x, VarKey::RouteDemand { chain: s, demand: dm, option: o }, 1.0);
                set(&mut x, VarKey::RouteChain { chain: s, option: o }, 1.0);
                let bw = chain.demands[dm].bandwidth;
                for &l in &options[o].path(dm).links {
                    link_util[l.0] += bw / topo.link(l).capacity;
                }
                for (v, &srv) in dec.servers[dm].iter().enumerate() {
                    set(&mut x, VarKey::Use { chain: s, vnf: v, server: srv, demand: dm }, 1.0);
                    set(&mut x, VarKey::Place { chain: s, vnf: v, server: srv }, 1.0);
                    set(&mut x, VarKey::UsedServer { server: srv }, 1.0);
                }
            }
            for (v, vnf) in chain.vnfs.iter().enumerate() {
                for &srv in &d.candidates[s] {
                    let cap = topo.server(srv).capacity;
                    let u: f64 = dec
                        .servers
                        .iter()
                        .enumerate()
                        .filter(|(_, sv)| sv[v] == srv)
                        .map(|(dm, _)| chain.demands[dm].bandwidth * vnf.load_ratio / cap)
                        .sum();
                    let active = dec.servers.iter().any(|sv| sv[v] == srv);
                    set(&mut x, VarKey::VnfUtil { chain: s, vnf: v, server: srv }, u);
                    server_util[srv.0] += u;
                    let fresh = d.initial.as_ref().is_some_and(|init| !init.placed(s, v, srv));
                    if overhead && fresh {
                        server_util[srv.0] += super::replica_overhead(e_r, cap, u, active);
                    }
                }
            }
        }
        let main = matches!(self.meta.kind, ModelKind::Main(_));
        for srv in &topo.servers {
            let u = server_util[srv.id.0];
            set(&mut x, VarKey::ServerUtil { server: srv.id }, u);
            if main {
                set(&mut x, VarKey::ServerCost { server: srv.id }, d.costs.envelope(u));
            }
        }
        for l in &topo.links {
            let u = link_util[l.id.0];
            set(&mut x, VarKey::LinkUtil { link: l.id }, u);
            if main {
                set(&mut x, VarKey::LinkCost { link: l.id }, d.costs.envelope(u));
            }
        }
        if let (true, Some(init)) = (main, d.initial.as_ref()) {
            let placement = self.placement(decisions);
            for (s, chain) in d.workload.chains.iter().enumerate() {
                for v in 0..chain.vnfs.len() {
                    let srv = init.chains[s].vnf_servers[v];
                    let kept = placement.chains[s][v].contains(&srv);
                    let arg =
                        if kept { 0.0 } else { self.meta.params.e_m * init.utilization(topo, &d.workload, s, v, srv) };
                    set(&mut x, VarKey::MigrationCost { chain: s, vnf: v }, d.costs.envelope(arg));
                }
            }
        }
        x
    }
}
