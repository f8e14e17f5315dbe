//! Primary-link outage under Rayleigh fading with the SU as interferer.
//!
//! With `χ_pp ~ Exp(δ_pp)` and `χ_sp ~ Exp(δ_sp)` (rate parametrization),
//! the PU decodes iff `r_p < P·χ_pp / (N0 + P_j·χ_sp)` where
//! `r_p = 2^{r̄_p/B} − 1`. Conditioning on `χ_sp` and integrating gives
//!
//! ```text
//! Pr(suc | P_j) = exp(−δ_pp·r_p·N0/P) / (1 + δ_pp·P_j·r_p / (P·δ_sp))
//! ```

use std::f64::consts::LN_2;

use crate::params::{PowerLevel, SystemParams};

/// SINR threshold `r_p = 2^{r̄_p/B} − 1` of the primary link.
pub fn pu_sinr_threshold(params: &SystemParams) -> f64 {
    (params.pu_rate_bps / params.bandwidth_hz * LN_2).exp_m1()
}

/// Interference-free exponent `δ_pp·r_p·N0/P` and interference ratio `δ_pp·P_j·r_p/(P·δ_sp)`.
fn outage_terms(params: &SystemParams, level: PowerLevel) -> (f64, f64) {
    let rp = pu_sinr_threshold(params);
    let p = params.pu_power_psd;
    let noise_term = params.fading_pp * rp * params.noise_psd / p;
    let interference = params.fading_pp * params.power(level) * rp / (p * params.fading_sp);
    (noise_term, interference)
}

/// Probability the PU packet is decoded while the SU transmits at `level`.
pub fn pu_success_prob(params: &SystemParams, level: PowerLevel) -> f64 {
    let (noise_term, interference) = outage_terms(params, level);
    (-noise_term).exp() / (1.0 + interference)
}

/// Probability of PU outage (equivalently, of a NACK) at SU power `level`.
pub fn pu_outage_prob(params: &SystemParams, level: PowerLevel) -> f64 {
    let (noise_term, interference) = outage_terms(params, level);
    // 1 − e^{−a}/(1+b) = (b − expm1(−a)) / (1+b)
    (interference - (-noise_term).exp_m1()) / (1.0 + interference)
}

/// Probability that a NACK is emitted and the SU overhears it.
pub fn nack_access_prob(params: &SystemParams, level: PowerLevel) -> f64 {
    (1.0 - params.feedback_miss_prob) * pu_outage_prob(params, level)
}

/// `Pr(NACK_j)` for the three SU power levels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutageTriple {
    pub pr_nack: [f64; 3],
}

impl OutageTriple {
    pub fn new(params: &SystemParams) -> Self {
        Self {
            pr_nack: PowerLevel::ALL.map(|l| pu_outage_prob(params, l)),
        }
    }

    pub fn get(&self, level: PowerLevel) -> f64 {
        self.pr_nack[level.index()]
    }
}
