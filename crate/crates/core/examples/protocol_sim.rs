//! Slot-level DPL/TPL protocol simulation next to the analytical model.
//!
//! The analytical chain sends a slot whose NACK was missed back to the
//! prior-rho states, while the protocol always retransmits; the printed gap
//! shows how far apart the two are for each feedback miss probability.

use cr_feedback_ec::chain::pu_success_rate;
use cr_feedback_ec::ec::effective_capacity;
use cr_feedback_ec::params::{SchemeKind, SystemParams};
use cr_feedback_ec::sim::{protocol_fidelity, SensingModel, SimConfig};
use cr_feedback_ec::specfun::sensing_probs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig::protocol(5_000, 40, 2024);
    for eps in [0.0, 0.3, 0.6] {
        let mut p = SystemParams::table1();
        p.feedback_miss_prob = eps;
        let params = p.validate()?;
        let sensing = sensing_probs(&params)?;
        for scheme in SchemeKind::ALL {
            let f = protocol_fidelity(&params, scheme, &sensing, &cfg)?;
            let ec = effective_capacity(&params, scheme, &sensing)?;
            println!(
                "eps {eps:.1} {scheme}: success analytical {:.6}, simulated {:.6} (gap {:+.2e}); \
                 EC analytical {:.3}, simulated {:.3} bits/slot",
                f.analytical,
                f.empirical.value().unwrap_or(f64::NAN),
                f.gap.unwrap_or(f64::NAN),
                ec.ec_bits_per_slot,
                f.report.empirical_ec_bits_per_slot.unwrap_or(f64::NAN),
            );
        }
    }

    // Symbol-level sensing draws NB Gaussian samples per slot instead of using P_d/P_f.
    let params = SystemParams::table1().validate()?;
    let sensing = sensing_probs(&params)?;
    let cfg = SimConfig { sensing_model: SensingModel::SymbolLevel, ..SimConfig::protocol(2_000, 10, 7) };
    let f = protocol_fidelity(&params, SchemeKind::Tpl, &sensing, &cfg)?;
    println!("\nsymbol-level sensing, TPL:\n{}", f.report);
    println!("analytical success {:.6}", pu_success_rate(&params, SchemeKind::Tpl, &sensing)?);
    Ok(())
}
