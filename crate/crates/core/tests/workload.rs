use proptest::prelude::*;

use vnfplace::topology::{build_fat_tree, build_leaf_spine, NodeKind};
use vnfplace::workload::{
    fat_tree_sfc, generate_fat_tree_workload, generate_leaf_spine_workload, leaf_spine_sfc, Interval, PairSelection,
    Workload,
};

fn on_grid(x: f64) -> bool {
    ((x * 10.0).round() - x * 10.0).abs() < 1e-9
}

proptest! {
    #[test]
    fn fat_tree_draws_stay_in_range(
        seed in any::<u64>(),
        k in 1usize..=20,
        lo in 1usize..=5,
        extra in 0usize..=5,
        bw_lo in 1u32..=50,
        bw_extra in 0u32..=100,
    ) {
        let t = build_fat_tree(4, 1, 1000.0, 1000.0).unwrap();
        let demands = Interval::new(lo, lo + extra);
        let bw = Interval::new(bw_lo as f64, (bw_lo + bw_extra) as f64);
        let w = generate_fat_tree_workload(&t, &PairSelection::Sampled(k), demands, bw, &fat_tree_sfc(), seed).unwrap();
        w.validate(&t).unwrap();
        prop_assert_eq!(w.chains.len(), k.min(8 * 7));
        prop_assert_eq!(w.total_vnfs(), 3 * w.chains.len());
        for (i, c) in w.chains.iter().enumerate() {
            prop_assert_eq!(c.id, i);
            prop_assert_ne!(c.source, c.destination);
            prop_assert!(demands.contains(c.demands.len()));
            for (j, d) in c.demands.iter().enumerate() {
                prop_assert_eq!(d.id, j);
                prop_assert!(bw.contains(d.bandwidth) && on_grid(d.bandwidth));
            }
        }
        let again = generate_fat_tree_workload(&t, &PairSelection::Sampled(k), demands, bw, &fat_tree_sfc(), seed).unwrap();
        prop_assert_eq!(&w, &again);
    }

    #[test]
    fn leaf_spine_draws_both_directions(seed in any::<u64>(), per_dir in 1usize..=4, leaves in 2usize..=6) {
        let t = build_leaf_spine(leaves, 2, 1, 1000.0, 1000.0).unwrap();
        let ls = t.nodes_of_kind(NodeKind::Leaf);
        let bw = Interval::new(70.0, 110.0);
        let w = generate_leaf_spine_workload(&t, per_dir, Interval::new(6, 12), bw, &leaf_spine_sfc(), seed).unwrap();
        prop_assert_eq!(w.chains.len(), 2 * per_dir);
        for (i, c) in w.chains.iter().enumerate() {
            let expected = if i < per_dir { (ls[0], ls[leaves - 1]) } else { (ls[leaves - 1], ls[0]) };
            prop_assert_eq!((c.source, c.destination), expected);
            prop_assert!(c.demands.iter().all(|d| bw.contains(d.bandwidth) && on_grid(d.bandwidth)));
        }
    }

    #[test]
    fn json_file_roundtrip(seed in any::<u64>()) {
        let t = build_fat_tree(2, 1, 1000.0, 1000.0).unwrap();
        let w = generate_fat_tree_workload(&t, &PairSelection::All, Interval::new(1, 3), Interval::new(1.0, 30.0), &fat_tree_sfc(), seed).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("workload.json");
        w.store(&path).unwrap();
        prop_assert_eq!(Workload::load(&path).unwrap(), w);
    }
}

#[test]
fn rejects_non_service_endpoints() {
    let t = build_fat_tree(4, 1, 1000.0, 1000.0).unwrap();
    let core = t.nodes_of_kind(NodeKind::Core)[0];
    let tor = t.nodes_of_kind(NodeKind::Tor)[0];
    let pairs = PairSelection::Explicit(vec![(tor, core)]);
    let r = generate_fat_tree_workload(&t, &pairs, Interval::new(1, 1), Interval::new(1.0, 1.0), &fat_tree_sfc(), 0);
    assert!(r.is_err());
}

#[test]
fn load_reports_malformed_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, "{ not json").unwrap();
    assert!(Workload::load(&path).is_err());
}
