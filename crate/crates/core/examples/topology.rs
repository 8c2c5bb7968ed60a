//! Builds both fabrics and prints their shape.

use vnfplace::topology::{build_fat_tree, build_leaf_spine, NodeKind};

fn main() -> vnfplace::Result<()> {
    let ft = build_fat_tree(4, 4, 1000.0, 1000.0)?;
    println!("fat-tree k=4: {} nodes, {} directed links, {} servers", ft.nodes.len(), ft.links.len(), ft.servers.len());
    for kind in [NodeKind::Tor, NodeKind::Aggregation, NodeKind::Core] {
        println!("  {kind:?}: {}", ft.nodes_of_kind(kind).len());
    }

    let ls = build_leaf_spine(4, 4, 2, 1000.0, 1000.0)?;
    println!(
        "leaf-spine 4x4: {} nodes, {} directed links, {} servers",
        ls.nodes.len(),
        ls.links.len(),
        ls.servers.len()
    );
    for &leaf in &ls.service_nodes() {
        let n = ls.node(leaf);
        println!(
            "  {} hosts servers {:?}, degree {}",
            n.name,
            n.servers.iter().map(|s| s.0).collect::<Vec<_>>(),
            ls.degree(leaf)
        );
    }
    Ok(())
}
