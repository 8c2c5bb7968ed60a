//! Runs the annealing heuristic with several seeds and compares against the
//! exact optimum.

use vnfplace::cli::{prepare, preset, ExperimentConfig};
use vnfplace::model::Method;
use vnfplace::solve::{solve_exact, solve_heuristic, SolveBudget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(preset("paper-ecmp-desk").expect("bundled")).map_err(|d| format!("{d:?}"))?;
    let scenario = prepare(&cfg)?;
    let budget = SolveBudget::default();
    for method in Method::ALL {
        let model = scenario.build_cell(&cfg, method, 0.5)?;
        let exact = solve_exact(&model, &budget).objective_value;
        for seed in 1..=3 {
            let h = solve_heuristic(&model, seed, &budget);
            println!(
                "{method} seed {seed}: {:.9} (exact {exact:.9}, ratio {:.4})",
                h.objective_value,
                h.objective_value / exact
            );
        }
    }
    Ok(())
}
