//! Effective capacity from the spectral radius of `Φ(−θ)R`.
//!
//! `EC(θ) = −ln sp(Φ(−θ)R) / θ` bits per slot, where `Φ(−θ)` holds the
//! per-state moment generating function `e^{−θ·service}` of the bits served
//! in each state.

use rayon::prelude::*;

use crate::chain::{build_chain, steady_state, ChainModel, NUM_STATES};
use crate::error::{Error, Result};
use crate::params::{SchemeKind, SystemParams, ValidatedParams};
use crate::specfun::SensingProbs;

/// Below this θ the small-θ limit (stationary mean service) is returned.
pub const THETA_LIMIT: f64 = 1e-8;

const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct EcResult {
    pub theta: f64,
    pub spectral_radius: f64,
    pub ec_bits_per_slot: f64,
    pub ec_bits_per_sec: f64,
    pub rates_used: [f64; 3],
}

/// Diagonal of `Φ(−θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiMatrix {
    pub diag: [f64; NUM_STATES],
}

impl PhiMatrix {
    pub fn for_chain(chain: &ChainModel, theta: f64) -> Self {
        Self {
            diag: std::array::from_fn(|i| (-theta * chain.service_bits(i)).exp()),
        }
    }

    /// `Φ·M`: scales row i of `m` by `diag[i]`.
    pub fn apply(&self, m: &[[f64; NUM_STATES]; NUM_STATES]) -> [[f64; NUM_STATES]; NUM_STATES] {
        std::array::from_fn(|i| m[i].map(|x| x * self.diag[i]))
    }
}

/// `Φ(−θ)` for the given scheme. Transmission states carry `e^{−θ·r·duration}`,
/// OFF states exactly 1.
pub fn build_phi(params: &SystemParams, scheme: SchemeKind, theta: f64) -> PhiMatrix {
    let states = crate::chain::state_catalog(params, scheme);
    PhiMatrix {
        diag: std::array::from_fn(|i| {
            let s = &states[i];
            if s.channel_on {
                (-s.tx_duration_s * theta * params.rate(s.su_power_level)).exp()
            } else {
                1.0
            }
        }),
    }
}

/// Perron root of an entrywise-nonnegative square matrix by power iteration
/// from the all-ones vector.
pub fn spectral_radius<const N: usize>(m: &[[f64; N]; N]) -> Result<f64> {
    if m.iter().flatten().any(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::Domain {
            function: "spectral_radius",
            detail: "matrix must be finite and entrywise nonnegative".into(),
        });
    }
    let mut v = [1.0; N];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let w: [f64; N] = std::array::from_fn(|i| m[i].iter().zip(&v).map(|(a, b)| a * b).sum());
        let norm = w.iter().fold(0.0, |acc: f64, &x| acc.max(x));
        if norm == 0.0 {
            // nilpotent on the iterate's support
            return Ok(0.0);
        }
        let next: [f64; N] = w.map(|x| x / norm);

        // Collatz–Wielandt bounds bracket the Perron root when v > 0.
        if v.iter().all(|&x| x > 0.0) {
            let (lo, hi) = w.iter().zip(&v).fold((f64::INFINITY, 0.0f64), |(lo, hi), (a, b)| {
                let r = a / b;
                (lo.min(r), hi.max(r))
            });
            if hi - lo <= POWER_TOL * hi {
                return Ok(0.5 * (lo + hi));
            }
        }

        let dv = next.iter().zip(&v).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        residual = (norm - lambda).abs() / norm;
        lambda = norm;
        v = next;
        if dv <= POWER_TOL && residual <= POWER_TOL {
            return Ok(lambda);
        }
    }
    Err(Error::NoConvergence {
        what: "spectral radius power iteration",
        iterations: POWER_MAX_ITER,
        residual,
    })
}

/// Stationary mean service Σ π_i·service_i in bits per slot.
pub fn mean_service_bits(chain: &ChainModel) -> Result<f64> {
    let ss = steady_state(chain)?;
    Ok(ss.pi.iter().enumerate().map(|(i, p)| p * chain.service_bits(i)).sum())
}

/// Effective capacity of an already-built chain at QoS exponent `theta`.
pub fn effective_capacity_of(chain: &ChainModel, theta: f64) -> Result<EcResult> {
    if !(theta >= 0.0) || !theta.is_finite() {
        return Err(Error::Domain {
            function: "effective_capacity",
            detail: format!("theta = {theta} must be finite and >= 0"),
        });
    }
    let (sp, per_slot) = if theta <= THETA_LIMIT {
        (1.0, mean_service_bits(chain)?)
    } else {
        let phi = PhiMatrix::for_chain(chain, theta);
        let sp = spectral_radius(&phi.apply(&chain.transition))?;
        (sp, (-sp.ln() / theta).max(0.0))
    };
    Ok(EcResult {
        theta,
        spectral_radius: sp,
        ec_bits_per_slot: per_slot,
        ec_bits_per_sec: per_slot / chain.frame_duration_s,
        rates_used: chain.rates_used,
    })
}

pub fn effective_capacity(params: &ValidatedParams, scheme: SchemeKind, sensing: &SensingProbs) -> Result<EcResult> {
    let chain = build_chain(params, scheme, sensing);
    effective_capacity_of(&chain, params.qos_exponent)
}

/// Inclusive grid `min, min + step, …, ≤ max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateRange {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl RateRange {
    pub fn single(rate: f64) -> Self {
        Self { min: rate, max: rate, step: 1.0 }
    }

    pub fn values(&self) -> Vec<f64> {
        if !(self.step > 0.0) || !(self.min <= self.max) || !self.min.is_finite() || !self.max.is_finite() {
            return Vec::new();
        }
        let slack = self.step * 1e-9;
        let count = ((self.max - self.min + slack) / self.step).floor() as usize + 1;
        (0..count).map(|k| self.min + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateGrid {
    pub r0: RateRange,
    pub r1: RateRange,
    pub r2: RateRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSearch {
    pub best: EcResult,
    /// Every evaluated `(r0, r1, r2)` with its EC in bits/s, in lexicographic order.
    pub surface: Option<Vec<([f64; 3], f64)>>,
}

/// Exhaustive grid search for the rate triple maximizing EC.
///
/// Ties go to the lexicographically smallest `(r0, r1, r2)`. Under DPL r0 has
/// no effect, so the smallest r0 is always reported.
pub fn optimize_rates(
    params: &ValidatedParams,
    scheme: SchemeKind,
    sensing: &SensingProbs,
    grid: &RateGrid,
    keep_surface: bool,
) -> Result<RateSearch> {
    let axes = [grid.r0.values(), grid.r1.values(), grid.r2.values()];
    for (name, axis) in ["r0", "r1", "r2"].iter().zip(&axes) {
        if axis.is_empty() {
            return Err(Error::EmptyGrid(format!("{name} range has no points")));
        }
    }
    let mut points = Vec::with_capacity(axes.iter().map(Vec::len).product());
    for &r0 in &axes[0] {
        for &r1 in &axes[1] {
            for &r2 in &axes[2] {
                points.push([r0, r1, r2]);
            }
        }
    }

    let evaluated: Vec<EcResult> = points
        .par_iter()
        .map(|&rates| {
            let mut p = params.params().clone();
            p.su_rates_bps = rates;
            let p = p.validate_boundary()?;
            effective_capacity(&p, scheme, sensing)
        })
        .collect::<Result<_>>()?;

    let mut best = 0;
    for (i, r) in evaluated.iter().enumerate() {
        if r.ec_bits_per_slot > evaluated[best].ec_bits_per_slot {
            best = i;
        }
    }
    let surface = keep_surface.then(|| {
        points
            .iter()
            .zip(&evaluated)
            .map(|(p, r)| (*p, r.ec_bits_per_sec))
            .collect()
    });
    Ok(RateSearch {
        best: evaluated[best].clone(),
        surface,
    })
}
