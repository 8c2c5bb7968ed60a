//! Runs a full config (a preset name or a TOML path) and writes its report
//! files. Usage: `run_experiment [config] [out_dir]`.

use std::path::PathBuf;

use vnfplace::cli::{run, validate, ExperimentConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = args.next().unwrap_or_else(|| "paper-sdn-desk".into());
    let mut cfg = ExperimentConfig::load(&config).map_err(|d| format!("{d:?}"))?;
    if let Some(out) = args.next() {
        cfg.out = PathBuf::from(out);
    }
    let problems = validate(&cfg);
    if !problems.is_empty() {
        return Err(format!("{problems:?}").into());
    }
    let outcome = run(&cfg)?;
    for c in &outcome.cells {
        println!("{} alpha={} {:?} {}", c.method, c.alpha, c.status, c.failure.as_deref().unwrap_or("ok"));
    }
    println!("{} files in {}", outcome.files.len(), cfg.out.display());
    Ok(())
}
