//! Equal-cost path enumeration and end-to-end route catalogs.
//!
//! A route *skeleton* is the ordered list of service nodes a chain's traffic
//! visits. The SDN catalog expands every skeleton into every combination of
//! equal-cost segments; the ECMP catalog fixes one hashed segment per demand
//! and per placement alternative, since ECMP forwarding cannot be steered.

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::topology::{LinkId, NodeId, Topology};
use crate::workload::ServiceChain;

/// Default guard on the number of paths per chain in an SDN catalog.
pub const DEFAULT_CATALOG_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Path {
    pub nodes: Vec<NodeId>,
    pub links: Vec<LinkId>,
    /// Positions of nodes that carry servers, in traversal order.
    pub service_nodes: Vec<NodeId>,
}

impl Path {
    fn single(topo: &Topology, node: NodeId) -> Path {
        let service_nodes = if topo.node(node).kind.is_service() { vec![node] } else { Vec::new() };
        Path { nodes: vec![node], links: Vec::new(), service_nodes }
    }

    fn from_links(topo: &Topology, start: NodeId, links: Vec<LinkId>) -> Path {
        let mut nodes = vec![start];
        nodes.extend(links.iter().map(|&l| topo.link(l).to));
        let service_nodes = nodes.iter().copied().filter(|&n| topo.node(n).kind.is_service()).collect();
        Path { nodes, links, service_nodes }
    }

    pub fn source(&self) -> NodeId {
        self.nodes[0]
    }

    pub fn destination(&self) -> NodeId {
        *self.nodes.last().expect("path has at least one node")
    }

    pub fn hops(&self) -> usize {
        self.links.len()
    }

    /// 1 when the path traverses `link`.
    pub fn traverses(&self, link: LinkId) -> u8 {
        u8::from(self.links.contains(&link))
    }

    /// Joins two paths sharing an endpoint.
    pub fn concat(&self, topo: &Topology, next: &Path) -> Path {
        assert_eq!(self.destination(), next.source(), "paths do not meet");
        let mut links = self.links.clone();
        links.extend_from_slice(&next.links);
        Path::from_links(topo, self.source(), links)
    }
}

fn require_service(topo: &Topology, node: NodeId, name: &'static str) -> Result<()> {
    match topo.nodes.get(node.0) {
        Some(n) if n.kind.is_service() => Ok(()),
        Some(n) => Err(Error::invalid(name, format!("{} is not a service node", n.name))),
        None => Err(Error::invalid(name, format!("unknown node {}", node.0))),
    }
}

/// All minimum-hop paths from `src` to `dst`, sorted by node sequence.
pub fn enumerate_equal_cost_paths(topo: &Topology, src: NodeId, dst: NodeId) -> Result<Vec<Path>> {
    require_service(topo, src, "src")?;
    require_service(topo, dst, "dst")?;
    Ok(min_hop_paths(topo, src, dst))
}

fn min_hop_paths(topo: &Topology, src: NodeId, dst: NodeId) -> Vec<Path> {
    if src == dst {
        return vec![Path::single(topo, src)];
    }
    // hop distance to dst over reversed links
    let mut dist = vec![usize::MAX; topo.nodes.len()];
    let mut incoming: Vec<Vec<NodeId>> = vec![Vec::new(); topo.nodes.len()];
    for l in &topo.links {
        incoming[l.to.0].push(l.from);
    }
    dist[dst.0] = 0;
    let mut queue = VecDeque::from([dst]);
    while let Some(n) = queue.pop_front() {
        for &m in &incoming[n.0] {
            if dist[m.0] == usize::MAX {
                dist[m.0] = dist[n.0] + 1;
                queue.push_back(m);
            }
        }
    }
    if dist[src.0] == usize::MAX {
        return Vec::new();
    }

    let mut out = Vec::new();
    let mut stack = Vec::new();
    extend(topo, &dist, src, dst, &mut stack, &mut out);
    out.sort_by(|a, b| a.nodes.cmp(&b.nodes));
    out
}

fn extend(topo: &Topology, dist: &[usize], at: NodeId, dst: NodeId, stack: &mut Vec<LinkId>, out: &mut Vec<Path>) {
    if at == dst {
        let start = stack.first().map(|&l| topo.link(l).from).unwrap_or(dst);
        out.push(Path::from_links(topo, start, stack.clone()));
        return;
    }
    for &l in topo.out_links(at) {
        let to = topo.link(l).to;
        if dist[to.0] + 1 == dist[at.0] {
            stack.push(l);
            extend(topo, dist, to, dst, stack, out);
            stack.pop();
        }
    }
}

/// Skeletons `<source, m_1, .., m_q, destination>` over distinct service
/// nodes with `q <= max_intermediate`, ordered by length then node ids.
pub fn build_route_set(
    topo: &Topology,
    source: NodeId,
    destination: NodeId,
    max_intermediate: usize,
) -> Vec<Vec<NodeId>> {
    if source == destination {
        return vec![vec![source]];
    }
    let pool: Vec<NodeId> = topo.service_nodes().into_iter().filter(|&n| n != source && n != destination).collect();
    let mut out = Vec::new();
    for q in 0..=max_intermediate.min(pool.len()) {
        let mut middle = Vec::with_capacity(q);
        let mut used = vec![false; pool.len()];
        permutations(&pool, q, &mut used, &mut middle, &mut |mid| {
            let mut seq = Vec::with_capacity(q + 2);
            seq.push(source);
            seq.extend_from_slice(mid);
            seq.push(destination);
            out.push(seq);
        });
    }
    out
}

fn permutations(pool: &[NodeId], q: usize, used: &mut [bool], acc: &mut Vec<NodeId>, emit: &mut impl FnMut(&[NodeId])) {
    if acc.len() == q {
        emit(acc);
        return;
    }
    for i in 0..pool.len() {
        if !used[i] {
            used[i] = true;
            acc.push(pool[i]);
            permutations(pool, q, used, acc, emit);
            acc.pop();
            used[i] = false;
        }
    }
}

/// Collapses consecutive repeats, e.g. `[a, a, b, a] -> [a, b, a]`.
pub fn collapse_skeleton(nodes: &[NodeId]) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = Vec::with_capacity(nodes.len());
    for &n in nodes {
        if out.last() != Some(&n) {
            out.push(n);
        }
    }
    out
}

#[derive(Default)]
struct SegmentCache {
    segments: HashMap<(NodeId, NodeId), Vec<Path>>,
}

impl SegmentCache {
    fn get(&mut self, topo: &Topology, a: NodeId, b: NodeId) -> &[Path] {
        self.segments.entry((a, b)).or_insert_with(|| min_hop_paths(topo, a, b))
    }
}

/// Expands a skeleton into every combination of equal-cost segments.
pub fn expand_skeleton(topo: &Topology, skeleton: &[NodeId]) -> Vec<Path> {
    let mut cache = SegmentCache::default();
    expand_with(topo, skeleton, &mut cache)
}

fn expand_with(topo: &Topology, skeleton: &[NodeId], cache: &mut SegmentCache) -> Vec<Path> {
    let mut partial = vec![Path::single(topo, skeleton[0])];
    for w in skeleton.windows(2) {
        let segs = cache.get(topo, w[0], w[1]).to_vec();
        let mut next = Vec::with_capacity(partial.len() * segs.len());
        for p in &partial {
            for s in &segs {
                next.push(p.concat(topo, s));
            }
        }
        partial = next;
    }
    partial
}

/// One chain's full SDN path set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdnChainCatalog {
    pub chain: usize,
    pub paths: Vec<Path>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SdnCatalog {
    pub chains: Vec<SdnChainCatalog>,
}

pub fn build_sdn_chain_catalog(
    topo: &Topology,
    chain: &ServiceChain,
    max_intermediate: usize,
    cap: usize,
) -> Result<SdnChainCatalog> {
    require_service(topo, chain.source, "source")?;
    require_service(topo, chain.destination, "destination")?;
    let mut cache = SegmentCache::default();
    let mut seen = BTreeSet::new();
    let mut paths = Vec::new();
    for skeleton in build_route_set(topo, chain.source, chain.destination, max_intermediate) {
        for p in expand_with(topo, &skeleton, &mut cache) {
            if seen.insert(p.nodes.clone()) {
                paths.push(p);
                if paths.len() > cap {
                    return Err(Error::CatalogTooLarge { chain: chain.id, cap });
                }
            }
        }
    }
    Ok(SdnChainCatalog { chain: chain.id, paths })
}

pub fn build_sdn_catalog(
    topo: &Topology,
    chains: &[ServiceChain],
    max_intermediate: usize,
    cap: usize,
) -> Result<SdnCatalog> {
    let chains =
        chains.iter().map(|c| build_sdn_chain_catalog(topo, c, max_intermediate, cap)).collect::<Result<Vec<_>>>()?;
    Ok(SdnCatalog { chains })
}

pub(crate) fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the hashed choice of one segment of one demand.
fn segment_seed(seed: u64, chain: usize, demand: usize, a: NodeId, b: NodeId) -> u64 {
    [chain as u64, demand as u64, a.0 as u64, b.0 as u64].iter().fold(mix(seed), |h, &v| mix(h ^ v))
}

/// The ECMP route of one demand along a skeleton: each segment is drawn
/// uniformly among its equal-cost paths, keyed by (seed, chain, demand,
/// segment endpoints) so the same pair always hashes to the same path.
pub fn ecmp_route(topo: &Topology, skeleton: &[NodeId], chain: usize, demand: usize, seed: u64) -> Option<Path> {
    let mut cache = SegmentCache::default();
    ecmp_route_with(topo, skeleton, chain, demand, seed, &mut cache)
}

fn ecmp_route_with(
    topo: &Topology,
    skeleton: &[NodeId],
    chain: usize,
    demand: usize,
    seed: u64,
    cache: &mut SegmentCache,
) -> Option<Path> {
    let mut path = Path::single(topo, skeleton[0]);
    for w in skeleton.windows(2) {
        let segs = cache.get(topo, w[0], w[1]);
        if segs.is_empty() {
            return None;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(segment_seed(seed, chain, demand, w[0], w[1]));
        let pick = &segs[rng.gen_range(0..segs.len())];
        path = path.concat(topo, pick);
    }
    Some(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Alternative {
    /// Every VNF at its initial node.
    Baseline,
    /// VNF `vnf` moved to `node`, the rest at their initial nodes.
    Move { vnf: usize, node: NodeId },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcmpSubset {
    pub alternative: Alternative,
    pub skeleton: Vec<NodeId>,
    /// One pre-selected path per traffic demand, in demand order.
    pub paths: Vec<Path>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcmpChainCatalog {
    pub chain: usize,
    pub subsets: Vec<EcmpSubset>,
    pub warnings: Vec<String>,
}

impl EcmpChainCatalog {
    pub fn non_baseline(&self) -> impl Iterator<Item = &EcmpSubset> {
        self.subsets.iter().filter(|s| s.alternative != Alternative::Baseline)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcmpCatalog {
    pub chains: Vec<EcmpChainCatalog>,
}

/// Restricts which placement alternatives enter an ECMP catalog.
#[derive(Debug, Clone, Default)]
pub struct EcmpOptions {
    /// VNF positions allowed to move; all when `None`.
    pub movable: Option<Vec<usize>>,
    /// Candidate nodes; every service node when `None`.
    pub candidates: Option<Vec<NodeId>>,
}

/// Builds `P_s` for one chain given the node hosting each of its VNFs.
pub fn build_ecmp_chain_catalog(
    topo: &Topology,
    chain: &ServiceChain,
    initial_nodes: &[NodeId],
    options: &EcmpOptions,
    seed: u64,
) -> Result<EcmpChainCatalog> {
    if initial_nodes.len() != chain.vnfs.len() {
        return Err(Error::invalid(
            "initial_placement",
            format!("chain {} has {} VNFs but {} locations", chain.id, chain.vnfs.len(), initial_nodes.len()),
        ));
    }
    require_service(topo, chain.source, "source")?;
    require_service(topo, chain.destination, "destination")?;
    for &n in initial_nodes {
        require_service(topo, n, "initial_placement")?;
    }
    let candidates = options.candidates.clone().unwrap_or_else(|| topo.service_nodes());
    let movable: Vec<usize> = options.movable.clone().unwrap_or_else(|| (0..chain.vnfs.len()).collect());

    let mut alternatives = vec![(Alternative::Baseline, initial_nodes.to_vec())];
    for &v in &movable {
        for &node in &candidates {
            if node == initial_nodes[v] {
                continue;
            }
            let mut locs = initial_nodes.to_vec();
            locs[v] = node;
            alternatives.push((Alternative::Move { vnf: v, node }, locs));
        }
    }

    let mut cache = SegmentCache::default();
    let mut subsets = Vec::with_capacity(alternatives.len());
    let mut warnings = Vec::new();
    'alt: for (alternative, locs) in alternatives {
        let mut seq = vec![chain.source];
        seq.extend_from_slice(&locs);
        seq.push(chain.destination);
        let skeleton = collapse_skeleton(&seq);
        let mut paths = Vec::with_capacity(chain.demands.len());
        for j in 0..chain.demands.len() {
            match ecmp_route_with(topo, &skeleton, chain.id, j, seed, &mut cache) {
                Some(p) => paths.push(p),
                None => {
                    warnings.push(format!("chain {}: {alternative:?} unreachable, skipped", chain.id));
                    continue 'alt;
                }
            }
        }
        subsets.push(EcmpSubset { alternative, skeleton, paths });
    }
    Ok(EcmpChainCatalog { chain: chain.id, subsets, warnings })
}

pub fn build_ecmp_catalog(
    topo: &Topology,
    chains: &[ServiceChain],
    initial_nodes: &[Vec<NodeId>],
    options: &EcmpOptions,
    seed: u64,
) -> Result<EcmpCatalog> {
    let chains = chains
        .iter()
        .zip(initial_nodes)
        .map(|(c, locs)| build_ecmp_chain_catalog(topo, c, locs, options, seed))
        .collect::<Result<Vec<_>>>()?;
    Ok(EcmpCatalog { chains })
}

/// Audit view: subset -> demand -> node names.
pub fn ecmp_catalog_document(topo: &Topology, catalog: &EcmpCatalog) -> serde_json::Value {
    let names = |p: &Path| p.nodes.iter().map(|&n| topo.node(n).name.clone()).collect::<Vec<_>>();
    serde_json::json!({
        "chains": catalog.chains.iter().map(|c| serde_json::json!({
            "chain": c.chain,
            "subsets": c.subsets.iter().map(|s| serde_json::json!({
                "alternative": s.alternative,
                "demands": s.paths.iter().map(names).collect::<Vec<_>>(),
            })).collect::<Vec<_>>(),
            "warnings": c.warnings,
        })).collect::<Vec<_>>()
    })
}

pub fn sdn_catalog_document(topo: &Topology, catalog: &SdnCatalog) -> serde_json::Value {
    serde_json::json!({
        "chains": catalog.chains.iter().map(|c| serde_json::json!({
            "chain": c.chain,
            "paths": c.paths.iter()
                .map(|p| p.nodes.iter().map(|&n| topo.node(n).name.clone()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        })).collect::<Vec<_>>()
    })
}
