//! Effective capacity against the QoS exponent, analytical and by the MGF
//! trajectory estimator. The estimator is only run for small theta: for large
//! theta the average of e^{-theta S} is dominated by trajectories too rare to
//! sample.

use cr_feedback_ec::chain::build_chain;
use cr_feedback_ec::ec::{effective_capacity_of, mean_service_bits};
use cr_feedback_ec::params::{SchemeKind, SystemParams};
use cr_feedback_ec::sim::{estimate_ec, SimConfig};
use cr_feedback_ec::specfun::sensing_probs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SystemParams::table1().validate()?;
    let sensing = sensing_probs(&params)?;

    for scheme in SchemeKind::ALL {
        let chain = build_chain(&params, scheme, &sensing);
        println!("== {scheme} ==  mean service {:.4} bits/slot", mean_service_bits(&chain)?);
        println!("{:>8} {:>14} {:>14} {:>14}", "theta", "sp(PhiR)", "EC bits/slot", "MC bits/slot");
        for theta in [1e-4, 1e-3, 1e-2, 1e-1, 1.0] {
            let ec = effective_capacity_of(&chain, theta)?;
            let mc = if theta <= 1e-2 {
                let report = estimate_ec(&chain, theta, &SimConfig::chain(2_000, 2_000, 9))?;
                report.empirical_ec_bits_per_slot.map_or("-".into(), |x| format!("{x:.6}"))
            } else {
                "-".to_string()
            };
            println!("{theta:>8.0e} {:>14.10} {:>14.6} {mc:>14}", ec.spectral_radius, ec.ec_bits_per_slot);
        }
        println!();
    }
    Ok(())
}
