//! Energy-detector false-alarm and detection probabilities across thresholds,
//! with a symbol-level Monte Carlo check at the configured threshold.
//!
//! cargo run --example sensing [-- CONFIG.toml]

use cr_feedback_ec::params::{load_config, SystemParams};
use cr_feedback_ec::sim::monte_carlo_sensing;
use cr_feedback_ec::specfun::sensing_probs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let base = match std::env::args().nth(1) {
        Some(path) => load_config(path)?,
        None => SystemParams::table1(),
    };
    println!("NB = {} samples per sensing window", base.sample_count());
    println!("{:>8} {:>14} {:>14}", "lambda", "P_f", "P_d");
    for k in 0..=10 {
        let mut p = base.clone();
        p.detector_threshold = 1.0 + 0.1 * k as f64;
        let s = sensing_probs(&p.validate()?)?;
        println!("{:>8.2} {:>14.6e} {:>14.6}", 1.0 + 0.1 * k as f64, s.p_false_alarm, s.p_detection);
    }

    let params = base.validate()?;
    let closed = sensing_probs(&params)?;
    let (fa, det) = monte_carlo_sensing(&params, 100_000, 1);
    println!("\nat lambda = {}:", params.detector_threshold);
    println!("  P_f closed {:.6e}, simulated {:.6e}", closed.p_false_alarm, fa.value().unwrap_or(f64::NAN));
    println!("  P_d closed {:.6}, simulated {:.6}", closed.p_detection, det.value().unwrap_or(f64::NAN));
    Ok(())
}
