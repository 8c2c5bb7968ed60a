//! Independent feasibility check, on a solver answer and on a corrupted copy.

use vnfplace::cli::{prepare, preset, ExperimentConfig};
use vnfplace::model::{Method, VarKey};
use vnfplace::solve::{solve_heuristic, verify, SolveBudget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(preset("paper-sdn-desk").expect("bundled")).map_err(|d| format!("{d:?}"))?;
    let scenario = prepare(&cfg)?;
    let model = scenario.build_cell(&cfg, Method::Migration, 0.5)?;
    let sol = solve_heuristic(&model, 1, &SolveBudget::default());
    let report = verify(&model, &sol.assignment);
    println!("solver answer: feasible {}, objective {:.9}", report.feasible, report.objective);

    let mut x = sol.assignment.clone();
    let j = model.var(&VarKey::RouteDemand { chain: 0, demand: 0, option: 0 }).expect("route variable");
    x[j] = 1.0 - x[j];
    let report = verify(&model, &x);
    println!("flipped {}: feasible {}", model.variables[j].name, report.feasible);
    for v in report.violations.iter().take(5) {
        println!("  {} violated by {:e}", v.name, v.amount);
    }
    Ok(())
}
