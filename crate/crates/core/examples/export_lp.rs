//! Writes a cell as a CPLEX LP file and reads it back.

use vnfplace::cli::{prepare, preset, ExperimentConfig};
use vnfplace::model::Method;
use vnfplace::solve::{export_lp, parse_lp, LpDocument};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(preset("paper-ecmp-desk").expect("bundled")).map_err(|d| format!("{d:?}"))?;
    let scenario = prepare(&cfg)?;
    let model = scenario.build_cell(&cfg, Method::Replication, 0.9)?;
    let text = export_lp(&model);
    let path = std::env::temp_dir().join("vnfplace_rep_a0.9.lp");
    std::fs::write(&path, &text)?;
    println!("wrote {} ({} lines)", path.display(), text.lines().count());
    for line in text.lines().take(12) {
        println!("  {line}");
    }
    let doc = parse_lp(&std::fs::read_to_string(&path)?)?;
    println!("round trip identical: {}", doc.canonical() == LpDocument::from_model(&model).canonical());
    Ok(())
}
