use std::collections::HashSet;

use proptest::prelude::*;

use vnfplace::topology::{build_fat_tree, build_leaf_spine, NodeKind, Topology};

fn count(t: &Topology, kind: NodeKind) -> usize {
    t.nodes_of_kind(kind).len()
}

fn links_are_symmetric(t: &Topology) -> bool {
    let set: HashSet<_> = t.links.iter().map(|l| (l.from, l.to)).collect();
    set.len() == t.links.len() && t.links.iter().all(|l| set.contains(&(l.to, l.from)))
}

proptest! {
    #[test]
    fn fat_tree_structure(half in 1usize..=4, per_tor in 1usize..=3, cap in 1.0f64..2000.0) {
        let k = 2 * half;
        let t = build_fat_tree(k, per_tor, cap, cap).unwrap();
        t.validate().unwrap();
        prop_assert_eq!(count(&t, NodeKind::Tor), k * k / 2);
        prop_assert_eq!(count(&t, NodeKind::Aggregation), k * k / 2);
        prop_assert_eq!(count(&t, NodeKind::Core), k * k / 4);
        prop_assert_eq!(t.servers.len(), k * k / 2 * per_tor);
        prop_assert_eq!(t.links.len(), 2 * (k * k * k / 4 + k * k * k / 4));
        prop_assert!(links_are_symmetric(&t));
        for n in &t.nodes {
            let expected = match n.kind {
                NodeKind::Tor => half,
                NodeKind::Aggregation => k,
                NodeKind::Core => k,
                _ => unreachable!(),
            };
            prop_assert_eq!(t.degree(n.id), expected);
            prop_assert_eq!(t.node_by_name(&n.name), Some(n.id));
        }
        prop_assert!(t.servers.iter().all(|s| t.node(s.node).kind == NodeKind::Tor && s.capacity == cap));
    }

    #[test]
    fn leaf_spine_structure(leaves in 2usize..=8, spines in 1usize..=6, per_leaf in 1usize..=3) {
        let t = build_leaf_spine(leaves, spines, per_leaf, 1000.0, 1000.0).unwrap();
        t.validate().unwrap();
        prop_assert_eq!(count(&t, NodeKind::Leaf), leaves);
        prop_assert_eq!(count(&t, NodeKind::Spine), spines);
        prop_assert_eq!(t.servers.len(), leaves * per_leaf);
        prop_assert_eq!(t.links.len(), 2 * leaves * spines);
        prop_assert!(links_are_symmetric(&t));
        for n in &t.nodes {
            let expected = if n.kind == NodeKind::Leaf { spines } else { leaves };
            prop_assert_eq!(t.degree(n.id), expected);
        }
        prop_assert_eq!(t.service_nodes(), t.nodes_of_kind(NodeKind::Leaf));
    }

    #[test]
    fn json_roundtrip(half in 1usize..=3, per_tor in 1usize..=2) {
        let t = build_fat_tree(2 * half, per_tor, 100.0, 200.0).unwrap();
        let text = serde_json::to_string(&t).unwrap();
        let back: Topology = serde_json::from_str::<Topology>(&text).unwrap().reindex();
        back.validate().unwrap();
        for n in &t.nodes {
            prop_assert_eq!(t.out_links(n.id), back.out_links(n.id));
        }
    }
}

#[test]
fn rejects_degenerate_fabrics() {
    assert!(build_leaf_spine(1, 2, 1, 1000.0, 1000.0).is_err());
    assert!(build_leaf_spine(2, 0, 1, 1000.0, 1000.0).is_err());
    assert!(build_leaf_spine(2, 2, 0, 1000.0, 1000.0).is_err());
    assert!(build_fat_tree(4, 0, 1000.0, 1000.0).is_err());
    assert!(build_fat_tree(4, 1, 1000.0, f64::NAN).is_err());
}
