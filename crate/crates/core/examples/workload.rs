//! Draws a seeded fat-tree workload and prints it as JSON.

use vnfplace::topology::build_fat_tree;
use vnfplace::workload::{fat_tree_sfc, generate_fat_tree_workload, Interval, PairSelection};

fn main() -> vnfplace::Result<()> {
    let topo = build_fat_tree(4, 1, 1000.0, 1000.0)?;
    let w = generate_fat_tree_workload(
        &topo,
        &PairSelection::Sampled(3),
        Interval::new(2, 4),
        Interval::new(1.0, 30.0),
        &fat_tree_sfc(),
        7,
    )?;
    for c in &w.chains {
        let total: f64 = c.demands.iter().map(|d| d.bandwidth).sum();
        println!(
            "chain {}: {} -> {}, {} demands, {total:.1} Gbps",
            c.id,
            topo.node(c.source).name,
            topo.node(c.destination).name,
            c.demands.len()
        );
    }
    println!("{}", w.to_json());
    Ok(())
}
