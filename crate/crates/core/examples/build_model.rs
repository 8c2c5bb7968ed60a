//! Builds the initial-placement model and the three re-optimization models
//! of a bundled scenario and prints their sizes.

use vnfplace::cli::{prepare, preset, ExperimentConfig};
use vnfplace::model::{build_initial_placement_model, Method};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(preset("paper-sdn-desk").expect("bundled")).map_err(|d| format!("{d:?}"))?;
    let scenario = prepare(&cfg)?;
    let initial = build_initial_placement_model(&scenario.topology, &scenario.workload, &scenario.initial_catalog)?;
    println!("initial: {} variables, {} rows", initial.variables.len(), initial.constraints.len());
    for method in Method::ALL {
        let model = scenario.build_cell(&cfg, method, 0.5)?;
        let binaries = model.binaries().count();
        println!("{method}: {} variables ({binaries} binary), {} rows", model.variables.len(), model.constraints.len());
    }
    Ok(())
}
