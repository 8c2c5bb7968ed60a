//! Piecewise-linear approximation of the exponential utilization cost.

use vnfplace::costs::{make_exponential_approx, normalized_exp, DEFAULT_STEEPNESS};

fn main() -> vnfplace::Result<()> {
    let costs = make_exponential_approx(5, DEFAULT_STEEPNESS);
    for (i, s) in costs.segments.iter().enumerate() {
        println!("segment {i}: y = {:.5} u - {:.5}", s.slope, s.intercept);
    }
    println!("{:>5} {:>10} {:>10}", "u", "envelope", "exact");
    for k in 0..=10 {
        let u = k as f64 / 10.0;
        println!("{u:>5.1} {:>10.6} {:>10.6}", costs.evaluate(u)?, normalized_exp(DEFAULT_STEEPNESS, u));
    }
    Ok(())
}
