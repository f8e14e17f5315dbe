//! Grid search for the SU rates that maximize effective capacity.

use cr_feedback_ec::ec::{optimize_rates, RateGrid, RateRange};
use cr_feedback_ec::params::{SchemeKind, SystemParams};
use cr_feedback_ec::specfun::sensing_probs;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let params = SystemParams::table1().validate()?;
    let sensing = sensing_probs(&params)?;
    let axis = RateRange { min: 2_500.0, max: 40_000.0, step: 2_500.0 };
    let grid = RateGrid { r0: axis, r1: axis, r2: axis };

    for scheme in SchemeKind::ALL {
        let search = optimize_rates(&params, scheme, &sensing, &grid, true)?;
        let best = &search.best;
        println!(
            "{scheme}: r = {:?} bps, EC = {:.2} bps ({} grid points)",
            best.rates_used,
            best.ec_bits_per_sec,
            search.surface.as_ref().map_or(0, Vec::len)
        );
    }
    Ok(())
}
