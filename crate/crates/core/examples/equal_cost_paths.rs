//! Enumerates minimum-hop paths and the service-node route set of a pair.

use vnfplace::paths::{build_route_set, enumerate_equal_cost_paths};
use vnfplace::topology::{build_fat_tree, NodeKind};

fn main() -> vnfplace::Result<()> {
    let topo = build_fat_tree(4, 1, 1000.0, 1000.0)?;
    let tors = topo.nodes_of_kind(NodeKind::Tor);
    let name = |n: &vnfplace::topology::NodeId| topo.node(*n).name.clone();
    for (a, b) in [(tors[0], tors[1]), (tors[0], tors[7])] {
        let paths = enumerate_equal_cost_paths(&topo, a, b)?;
        println!("{} -> {}: {} paths of {} hops", name(&a), name(&b), paths.len(), paths[0].hops());
        for p in &paths {
            println!("  {}", p.nodes.iter().map(name).collect::<Vec<_>>().join(" "));
        }
    }
    let routes = build_route_set(&topo, tors[0], tors[7], 1);
    println!("route skeletons with at most one intermediate service node: {}", routes.len());
    Ok(())
}
