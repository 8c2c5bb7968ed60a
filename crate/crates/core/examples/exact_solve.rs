//! Solves one cell with branch and bound and prints the decisions.

use vnfplace::cli::{prepare, preset, ExperimentConfig};
use vnfplace::model::{count_migrations, count_replicas, Method};
use vnfplace::solve::{solve_exact, SolveBudget};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(preset("paper-ecmp-desk").expect("bundled")).map_err(|d| format!("{d:?}"))?;
    let scenario = prepare(&cfg)?;
    let model = scenario.build_cell(&cfg, Method::Combined, 0.5)?;
    let sol = solve_exact(&model, &SolveBudget::default());
    println!(
        "{:?} objective {:.9} after {} nodes, {} LP iterations",
        sol.status, sol.objective_value, sol.stats.nodes, sol.stats.lp_iterations
    );
    let placement = model.placement(&model.decisions(&sol.assignment)?);
    println!("migrations {}, replicas {}", count_migrations(&scenario.initial, &placement), count_replicas(&placement));
    for (s, chain) in placement.chains.iter().enumerate() {
        println!(
            "chain {s}: {:?}",
            chain.iter().map(|v| v.iter().map(|x| x.0).collect::<Vec<_>>()).collect::<Vec<_>>()
        );
    }
    Ok(())
}
