//! Data-center graphs: k-ary fat-trees and two-tier leaf-spine fabrics.
//!
//! Servers hang off their TOR or leaf switch and are addressed globally by
//! [`ServerId`]. Every physical cable becomes two directed [`Link`]s with the
//! same capacity, so utilization is tracked per direction.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default processing capacity of a server, in units.
pub const DEFAULT_SERVER_CAPACITY: f64 = 1000.0;
/// Default link capacity, in Gbps.
pub const DEFAULT_LINK_CAPACITY: f64 = 1000.0;
/// Default number of spine switches in a leaf-spine fabric.
pub const DEFAULT_SPINES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ServerId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LinkId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Tor,
    Aggregation,
    Core,
    Leaf,
    Spine,
}

impl NodeKind {
    /// Service kinds are the only ones that host servers.
    pub fn is_service(self) -> bool {
        matches!(self, NodeKind::Tor | NodeKind::Leaf)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    FatTree,
    LeafSpine,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    pub name: String,
    pub kind: NodeKind,
    pub servers: Vec<ServerId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Server {
    pub id: ServerId,
    pub node: NodeId,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: LinkId,
    pub from: NodeId,
    pub to: NodeId,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub flavor: Flavor,
    pub nodes: Vec<Node>,
    pub servers: Vec<Server>,
    pub links: Vec<Link>,
    #[serde(skip)]
    out_links: Vec<Vec<LinkId>>,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

fn check_capacity(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::invalid(name, format!("must be positive, got {value}")));
    }
    Ok(())
}

struct Builder {
    nodes: Vec<Node>,
    servers: Vec<Server>,
    links: Vec<Link>,
    server_capacity: f64,
    link_capacity: f64,
}

impl Builder {
    fn new(server_capacity: f64, link_capacity: f64) -> Self {
        Builder { nodes: Vec::new(), servers: Vec::new(), links: Vec::new(), server_capacity, link_capacity }
    }

    fn node(&mut self, name: String, kind: NodeKind, servers: usize) -> NodeId {
        let id = NodeId(self.nodes.len());
        let mut ids = Vec::with_capacity(servers);
        for _ in 0..servers {
            let sid = ServerId(self.servers.len());
            self.servers.push(Server { id: sid, node: id, capacity: self.server_capacity });
            ids.push(sid);
        }
        self.nodes.push(Node { id, name, kind, servers: ids });
        id
    }

    fn cable(&mut self, a: NodeId, b: NodeId) {
        for (from, to) in [(a, b), (b, a)] {
            let id = LinkId(self.links.len());
            self.links.push(Link { id, from, to, capacity: self.link_capacity });
        }
    }

    fn finish(self, flavor: Flavor) -> Topology {
        let mut topo =
            Topology { flavor, nodes: self.nodes, servers: self.servers, links: self.links, out_links: Vec::new() };
        topo.index();
        topo
    }
}

/// Builds a k-ary fat-tree with `pods` pods.
///
/// Each pod holds `pods/2` TOR and `pods/2` aggregation switches in a full
/// bipartite mesh; aggregation switch `j` of every pod connects to cores
/// `j*(k/2) .. (j+1)*(k/2)`.
pub fn build_fat_tree(
    pods: usize,
    servers_per_tor: usize,
    server_capacity: f64,
    link_capacity: f64,
) -> Result<Topology> {
    if pods < 2 || !pods.is_multiple_of(2) {
        return Err(Error::invalid("pods", format!("must be even and >= 2, got {pods}")));
    }
    if servers_per_tor == 0 {
        return Err(Error::invalid("servers_per_tor", "must be >= 1"));
    }
    check_capacity("server_capacity", server_capacity)?;
    check_capacity("link_capacity", link_capacity)?;

    let half = pods / 2;
    let mut b = Builder::new(server_capacity, link_capacity);
    let mut tors = Vec::new();
    let mut aggs = Vec::new();
    for pod in 0..pods {
        for i in 0..half {
            tors.push(b.node(format!("tor{}", pod * half + i + 1), NodeKind::Tor, servers_per_tor));
        }
        for i in 0..half {
            aggs.push(b.node(format!("agg{}", pod * half + i + 1), NodeKind::Aggregation, 0));
        }
    }
    let cores: Vec<NodeId> = (0..half * half).map(|i| b.node(format!("core{}", i + 1), NodeKind::Core, 0)).collect();

    for pod in 0..pods {
        for t in 0..half {
            for a in 0..half {
                b.cable(tors[pod * half + t], aggs[pod * half + a]);
            }
        }
        for a in 0..half {
            for c in 0..half {
                b.cable(aggs[pod * half + a], cores[a * half + c]);
            }
        }
    }
    Ok(b.finish(Flavor::FatTree))
}

/// Builds a two-tier fabric where every leaf connects to every spine.
pub fn build_leaf_spine(
    leaves: usize,
    spines: usize,
    servers_per_leaf: usize,
    server_capacity: f64,
    link_capacity: f64,
) -> Result<Topology> {
    if leaves < 2 {
        return Err(Error::invalid("leaves", format!("must be >= 2, got {leaves}")));
    }
    if spines == 0 {
        return Err(Error::invalid("spines", "must be >= 1"));
    }
    if servers_per_leaf == 0 {
        return Err(Error::invalid("servers_per_leaf", "must be >= 1"));
    }
    check_capacity("server_capacity", server_capacity)?;
    check_capacity("link_capacity", link_capacity)?;

    let mut b = Builder::new(server_capacity, link_capacity);
    let leaf_ids: Vec<NodeId> =
        (0..leaves).map(|i| b.node(format!("leaf{}", i + 1), NodeKind::Leaf, servers_per_leaf)).collect();
    let spine_ids: Vec<NodeId> = (0..spines).map(|i| b.node(format!("spine{}", i + 1), NodeKind::Spine, 0)).collect();
    for &l in &leaf_ids {
        for &s in &spine_ids {
            b.cable(l, s);
        }
    }
    Ok(b.finish(Flavor::LeafSpine))
}

impl Topology {
    fn index(&mut self) {
        let mut out = vec![Vec::new(); self.nodes.len()];
        for link in &self.links {
            out[link.from.0].push(link.id);
        }
        self.out_links = out;
    }

    /// Rebuilds derived indices; call after deserializing.
    pub fn reindex(mut self) -> Self {
        self.index();
        self
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn server(&self, id: ServerId) -> &Server {
        &self.servers[id.0]
    }

    pub fn link(&self, id: LinkId) -> &Link {
        &self.links[id.0]
    }

    pub fn out_links(&self, node: NodeId) -> &[LinkId] {
        &self.out_links[node.0]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.name == name).map(|n| n.id)
    }

    pub fn service_nodes(&self) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.kind.is_service()).map(|n| n.id).collect()
    }

    pub fn nodes_of_kind(&self, kind: NodeKind) -> Vec<NodeId> {
        self.nodes.iter().filter(|n| n.kind == kind).map(|n| n.id).collect()
    }

    /// Number of distinct neighbours reachable over outgoing links.
    pub fn degree(&self, node: NodeId) -> usize {
        self.out_links(node).len()
    }

    /// Checks the structural invariants of either flavor.
    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id.0 != i {
                return Err(Error::invalid("nodes", format!("node {} stored at index {i}", n.id.0)));
            }
            if n.kind.is_service() == n.servers.is_empty() {
                return Err(Error::invalid("nodes", format!("{} has servers inconsistent with kind", n.name)));
            }
            for s in &n.servers {
                if self.servers.get(s.0).map(|x| x.node) != Some(n.id) {
                    return Err(Error::invalid("servers", format!("server {} not attached to {}", s.0, n.name)));
                }
            }
        }
        for s in &self.servers {
            check_capacity("server_capacity", s.capacity)?;
        }
        for l in &self.links {
            check_capacity("link_capacity", l.capacity)?;
            if l.from == l.to {
                return Err(Error::invalid("links", format!("self loop at {}", l.from)));
            }
        }
        if !self.is_connected() {
            return Err(Error::invalid("links", "graph is not connected"));
        }
        if self.flavor == Flavor::LeafSpine {
            for l in &self.links {
                let (a, b) = (self.node(l.from).kind, self.node(l.to).kind);
                if a == b {
                    return Err(Error::invalid("links", format!("{a:?}-{b:?} link in leaf-spine")));
                }
            }
        }
        Ok(())
    }

    fn is_connected(&self) -> bool {
        if self.nodes.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([NodeId(0)]);
        seen[0] = true;
        while let Some(n) = queue.pop_front() {
            for &l in self.out_links(n) {
                let to = self.link(l).to;
                if !seen[to.0] {
                    seen[to.0] = true;
                    queue.push_back(to);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}
