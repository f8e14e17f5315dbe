//! Primary-link success and NACK probabilities for each SU power level as the
//! feedback miss probability varies.

use cr_feedback_ec::outage::{nack_access_prob, pu_outage_prob, pu_sinr_threshold, pu_success_prob};
use cr_feedback_ec::params::{PowerLevel, SystemParams};

fn main() {
    let mut p = SystemParams::table1();
    println!("PU SINR threshold r_p = {}", pu_sinr_threshold(&p));
    for level in PowerLevel::ALL {
        println!(
            "{level:?} (P/B = {:>5}): success {:.9}, outage {:.6e}",
            p.power(level),
            pu_success_prob(&p, level),
            pu_outage_prob(&p, level)
        );
    }

    println!("\nNACK access probability (1 - eps) * Pr(NACK)");
    println!("{:>6} {:>12} {:>12} {:>12}", "eps", "P0", "P1", "P2");
    for eps in [0.0, 0.1, 0.3, 0.5, 0.9] {
        p.feedback_miss_prob = eps;
        let q = PowerLevel::ALL.map(|l| nack_access_prob(&p, l));
        println!("{eps:>6.2} {:>12.4e} {:>12.4e} {:>12.4e}", q[0], q[1], q[2]);
    }
}
