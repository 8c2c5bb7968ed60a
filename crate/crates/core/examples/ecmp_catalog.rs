//! Builds the hashed ECMP catalog of one chain: a baseline subset plus one
//! subset per single-VNF move.

use vnfplace::paths::{build_ecmp_chain_catalog, EcmpOptions};
use vnfplace::topology::{build_fat_tree, NodeKind};
use vnfplace::workload::{fat_tree_sfc, ServiceChain, TrafficDemand};

fn main() -> vnfplace::Result<()> {
    let topo = build_fat_tree(4, 1, 1000.0, 1000.0)?;
    let tors = topo.nodes_of_kind(NodeKind::Tor);
    let chain = ServiceChain {
        id: 0,
        source: tors[0],
        destination: tors[7],
        vnfs: fat_tree_sfc(),
        demands: (0..3).map(|id| TrafficDemand { id, bandwidth: 10.0 }).collect(),
    };
    let initial = vec![tors[2]; 3];
    let options = EcmpOptions { movable: Some(vec![0]), candidates: Some(vec![tors[2], tors[4], tors[5]]) };
    let catalog = build_ecmp_chain_catalog(&topo, &chain, &initial, &options, 42)?;
    for subset in &catalog.subsets {
        println!("{:?}", subset.alternative);
        for (d, p) in subset.paths.iter().enumerate() {
            let names: Vec<_> = p.nodes.iter().map(|&n| topo.node(n).name.as_str()).collect();
            println!("  demand {d}: {}", names.join(" "));
        }
    }
    Ok(())
}
