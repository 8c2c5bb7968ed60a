//! Utilization report and migrations-replicas table for every cell.

use vnfplace::cli::{prepare, preset, solve_model, ExperimentConfig};
use vnfplace::metrics::{cdf, comparison_table, compute_report};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = ExperimentConfig::from_toml(preset("paper-sdn-desk").expect("bundled")).map_err(|d| format!("{d:?}"))?;
    let scenario = prepare(&cfg)?;
    let mut reports = Vec::new();
    for method in cfg.methods() {
        for &alpha in &cfg.model.alphas {
            let model = scenario.build_cell(&cfg, method, alpha)?;
            let sol = solve_model(&model, &cfg.solver, 1);
            let r = compute_report(&model, &sol, &scenario.initial)?;
            println!(
                "{}: server mean {:.4} max {:.4}, link mean {:.4} max {:.4}",
                r.stem(),
                r.server_mean,
                r.server_max,
                r.link_mean,
                r.link_max
            );
            reports.push(r);
        }
    }
    let links: Vec<f64> = reports[0].per_link.iter().map(|p| p.1).collect();
    println!("link CDF of {}: {:?}", reports[0].stem(), cdf(&links));
    print!("{}", comparison_table(&reports));
    Ok(())
}
