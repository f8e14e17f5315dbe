//! Regularized incomplete gamma functions and energy-detector sensing probabilities.
//!
//! `P(a, x)` here always takes the shape `a` first and the argument `x`
//! second. The energy statistic `Y` averaged over `NB` complex Gaussian
//! samples of variance `σ²` satisfies `NB·Y/σ² ~ Gamma(NB, 1)`, so
//! `Pr(Y > λ) = Q(NB, NB·λ/σ²)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::params::ValidatedParams;

/// Iteration cap shared by the series and the continued fraction.
/// Both need O(sqrt(a)) terms near the transition point, about 10^3 at a = 10^4.
pub const MAX_ITER: usize = 100_000;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;

/// Lanczos (g = 7, n = 9) log-gamma for a > 0.
pub fn ln_gamma(a: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if a < 0.5 {
        // reflection
        return (PI / (PI * a).sin()).ln() - ln_gamma(1.0 - a);
    }
    let a = a - 1.0;
    let mut sum = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        sum += c / (a + i as f64);
    }
    let t = a + G + 0.5;
    0.5 * (2.0 * PI).ln() + (a + 0.5) * t.ln() - t + sum.ln()
}

/// ln(1 + t) − t, accurate for small |t|.
fn log1pmx(t: f64) -> f64 {
    if t.abs() < 0.25 {
        // -t^2/2 + t^3/3 - t^4/4 + ...
        let mut term = t;
        let mut sum = 0.0;
        for k in 2..60 {
            term *= -t;
            let add = term / k as f64;
            sum += add;
            if add.abs() <= EPS * sum.abs() {
                break;
            }
        }
        sum
    } else {
        t.ln_1p() - t
    }
}

/// Stirling-series remainder lnΓ(a) − [(a − ½)ln a − a + ½ ln 2π], for a ≥ 10.
fn stirling_remainder(a: f64) -> f64 {
    let r = 1.0 / a;
    let r2 = r * r;
    r * (1.0 / 12.0
        - r2 * (1.0 / 360.0 - r2 * (1.0 / 1260.0 - r2 * (1.0 / 1680.0 - r2 / 1188.0))))
}

/// ln(x^a e^{−x} / Γ(a)), arranged to avoid cancellation for large a.
fn log_prefactor(a: f64, x: f64) -> f64 {
    if a >= 10.0 {
        let t = (x - a) / a;
        let core = if t.abs() < 0.5 {
            a * log1pmx(t)
        } else {
            a * (x / a).ln() - (x - a)
        };
        core + 0.5 * (a / (2.0 * PI)).ln() - stirling_remainder(a)
    } else {
        a * x.ln() - x - ln_gamma(a)
    }
}

/// Returns `(P(a, x), Q(a, x))`, each computed without forming `1 − other`
/// on the side where it would cancel.
pub fn reg_gamma_pair(a: f64, x: f64) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Domain {
            function: "reg_lower_gamma",
            detail: format!("shape a = {a} must be positive and finite"),
        });
    }
    if !(x >= 0.0) {
        return Err(Error::Domain {
            function: "reg_lower_gamma",
            detail: format!("argument x = {x} must be >= 0"),
        });
    }
    if x == 0.0 {
        return Ok((0.0, 1.0));
    }
    if x.is_infinite() {
        return Ok((1.0, 0.0));
    }

    let pref = log_prefactor(a, x);
    if x < a + 1.0 {
        let p = lower_series(a, x)? * pref.exp();
        let p = p.min(1.0);
        Ok((p, 1.0 - p))
    } else {
        let q = upper_continued_fraction(a, x)? * pref.exp();
        let q = q.min(1.0);
        Ok((1.0 - q, q))
    }
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x)/Γ(a).
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    reg_gamma_pair(a, x).map(|(p, _)| p)
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn reg_upper_gamma(a: f64, x: f64) -> Result<f64> {
    reg_gamma_pair(a, x).map(|(_, q)| q)
}

// Σ x^n / (a (a+1) ... (a+n)); multiply by the prefactor to get P.
fn lower_series(a: f64, x: f64) -> Result<f64> {
    let mut denom = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma series",
        iterations: MAX_ITER,
        residual: (term / sum).abs(),
    })
}

// Modified Lentz evaluation of the continued fraction for Γ(a, x) e^x x^{-a}.
fn upper_continued_fraction(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        what: "incomplete gamma continued fraction",
        iterations: MAX_ITER,
        residual: f64::NAN,
    })
}

/// False-alarm and detection probabilities of the energy detector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensingProbs {
    /// P_f = Pr(Y > λ | channel idle).
    pub p_false_alarm: f64,
    /// P_d = Pr(Y > λ | channel busy).
    pub p_detection: f64,
}

impl SensingProbs {
    /// Perfect sensing: never a false alarm, always detects.
    pub const PERFECT: SensingProbs = SensingProbs {
        p_false_alarm: 0.0,
        p_detection: 1.0,
    };
}

/// Energy-detector probabilities for the configured threshold and sample count.
pub fn sensing_probs(params: &ValidatedParams) -> Result<SensingProbs> {
    let nb = params.sample_count() as f64;
    let lambda = params.detector_threshold;
    let idle_var = params.noise_psd;
    let busy_var = params.noise_psd + params.pu_signal_var;
    Ok(SensingProbs {
        p_false_alarm: reg_upper_gamma(nb, nb * lambda / idle_var)?,
        p_detection: reg_upper_gamma(nb, nb * lambda / busy_var)?,
    })
}

/// Bypasses the detector model and returns `P_f = 0`, `P_d = 1`.
pub fn perfect_sensing_override(_params: &ValidatedParams) -> SensingProbs {
    SensingProbs::PERFECT
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::SystemParams;
    use proptest::prelude::*;

    // Reference values from 40-digit arithmetic.
    const P_300_300: f64 = 0.507_677_788_886_263_5;
    const P_1E4_1E4: f64 = 0.501_329_808_339_955_2;
    const P_1E4_9800: f64 = 0.022_207_543_813_969_694;
    const P_HALF_03: f64 = 0.561_421_973_919_000_1;
    const P_50_40: f64 = 0.070_335_066_659_394_95;
    const Q_300_2775: f64 = 0.905_516_943_779_253_8;
    const Q_300_555: f64 = 6.848_431_668_561_886e-33;

    /// Independent oracle: composite adaptive Simpson on the Gamma(a, 1)
    /// density for integer shape, with ln Γ(a) = Σ ln k. Shares no code with
    /// the series/continued-fraction path.
    fn quadrature_oracle(a: u32, x: f64) -> f64 {
        let ln_gamma_int: f64 = (1..a).map(|k| (k as f64).ln()).sum();
        let a = a as f64;
        let density = |t: f64| {
            if t <= 0.0 {
                if a == 1.0 { 1.0 } else { 0.0 }
            } else {
                ((a - 1.0) * t.ln() - t - ln_gamma_int).exp()
            }
        };
        fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
            (b - a) / 6.0 * (fa + 4.0 * fm + fb)
        }
        fn adapt<F: Fn(f64) -> f64>(
            f: &F,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let lm = 0.5 * (a + m);
            let rm = 0.5 * (m + b);
            let flm = f(lm);
            let frm = f(rm);
            let left = simpson(a, m, fa, flm, fm);
            let right = simpson(m, b, fm, frm, fb);
            let delta = left + right - whole;
            if depth == 0 || delta.abs() <= 15.0 * tol {
                left + right + delta / 15.0
            } else {
                adapt(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                    + adapt(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
            }
        }
        // Split into unit panels so the peak is always resolved.
        let panels = x.ceil().max(1.0) as usize * 4;
        let h = x / panels as f64;
        (0..panels)
            .map(|i| {
                let lo = i as f64 * h;
                let hi = lo + h;
                let (fa, fm, fb) = (density(lo), density(0.5 * (lo + hi)), density(hi));
                let whole = simpson(lo, hi, fa, fm, fb);
                adapt(&density, lo, hi, fa, fm, fb, whole, 1e-17, 40)
            })
            .sum()
    }

    #[test]
    fn oracle_agrees_with_frozen_reference() {
        assert!((quadrature_oracle(300, 300.0) - P_300_300).abs() < 1e-12);
        assert!((quadrature_oracle(50, 40.0) - P_50_40).abs() < 1e-12);
        assert!((quadrature_oracle(1, 2.0) - (1.0 - (-2.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn matches_reference_values() {
        let cases = [
            (300.0, 300.0, P_300_300),
            (1e4, 1e4, P_1E4_1E4),
            (1e4, 9800.0, P_1E4_9800),
            (0.5, 0.3, P_HALF_03),
            (50.0, 40.0, P_50_40),
        ];
        for (a, x, want) in cases {
            let got = reg_lower_gamma(a, x).unwrap();
            assert!((got - want).abs() <= 1e-12, "P({a}, {x}) = {got}, want {want}");
        }
        let q = reg_upper_gamma(300.0, 277.5).unwrap();
        assert!((q - Q_300_2775).abs() <= 1e-12);
        let q = reg_upper_gamma(300.0, 555.0).unwrap();
        assert!(((q - Q_300_555) / Q_300_555).abs() <= 1e-10, "{q}");
    }

    #[test]
    fn shape_one_is_exponential_cdf() {
        for i in 0..=200 {
            let x = i as f64 * 0.1;
            let got = reg_lower_gamma(1.0, x).unwrap();
            assert!((got - (1.0 - (-x).exp())).abs() <= 1e-12, "x = {x}");
        }
        assert!((reg_lower_gamma(1.0, 2.0).unwrap() - 0.864_664_716_763_387_3).abs() < 1e-12);
    }

    #[test]
    fn zero_argument_and_domain_errors() {
        assert_eq!(reg_lower_gamma(2.0, 0.0).unwrap(), 0.0);
        assert!(matches!(reg_lower_gamma(0.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(reg_lower_gamma(-1.0, 1.0), Err(Error::Domain { .. })));
        assert!(matches!(reg_lower_gamma(1.0, -0.5), Err(Error::Domain { .. })));
        assert!(reg_lower_gamma(f64::NAN, 1.0).is_err());
        assert_eq!(reg_lower_gamma(3.0, f64::INFINITY).unwrap(), 1.0);
    }

    #[test]
    fn ln_gamma_matches_factorials() {
        let mut ln_fact = 0.0;
        for n in 1..=170u32 {
            // ln Γ(n) = ln (n-1)!
            let got = ln_gamma(n as f64);
            assert!((got - ln_fact).abs() <= 1e-12 * ln_fact.abs().max(1.0), "n = {n}");
            ln_fact += (n as f64).ln();
        }
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn at_the_idle_mean_threshold_both_probabilities_coincide() {
        let mut p = SystemParams::table1();
        p.detector_threshold = p.noise_psd;
        p.pu_signal_var = 0.0;
        let s = sensing_probs(&p.validate().unwrap()).unwrap();
        assert_eq!(s.p_false_alarm, s.p_detection);
        assert!((s.p_false_alarm - (1.0 - P_300_300)).abs() < 1e-12);
    }

    #[test]
    fn table1_sensing() {
        let s = sensing_probs(&SystemParams::table1().validate().unwrap()).unwrap();
        assert!((s.p_detection - Q_300_2775).abs() < 1e-12);
        assert!(((s.p_false_alarm - Q_300_555) / Q_300_555).abs() < 1e-10);
    }

    #[test]
    fn huge_threshold_never_fires() {
        let mut p = SystemParams::table1();
        p.detector_threshold = 1e6;
        let s = sensing_probs(&p.validate().unwrap()).unwrap();
        assert_eq!(s.p_false_alarm, 0.0);
        assert_eq!(s.p_detection, 0.0);
    }

    #[test]
    fn perfect_override() {
        let p = SystemParams::table1().validate().unwrap();
        assert_eq!(perfect_sensing_override(&p), SensingProbs { p_false_alarm: 0.0, p_detection: 1.0 });
    }

    proptest! {
        #[test]
        fn lower_gamma_is_monotone(a in 0.05f64..2000.0, x in 0.0f64..3000.0, dx in 0.0f64..50.0) {
            let lo = reg_lower_gamma(a, x).unwrap();
            let hi = reg_lower_gamma(a, x + dx).unwrap();
            prop_assert!((0.0..=1.0).contains(&lo));
            prop_assert!(hi >= lo - 1e-14, "P({}, {}) = {} > P({}, {}) = {}", a, x, lo, a, x + dx, hi);
        }

        #[test]
        fn pair_sums_to_one(a in 0.05f64..5000.0, x in 0.0f64..6000.0) {
            let (p, q) = reg_gamma_pair(a, x).unwrap();
            prop_assert!((p + q - 1.0).abs() < 1e-14);
        }

        #[test]
        fn detection_dominates_false_alarm(
            lambda in 0.0f64..5.0,
            signal in 0.0f64..5.0,
            noise in 0.1f64..5.0,
            nb in 1u32..500,
        ) {
            let mut p = SystemParams::table1();
            p.detector_threshold = lambda;
            p.pu_signal_var = signal;
            p.noise_psd = noise;
            p.sensing_duration_s = nb as f64 / p.bandwidth_hz;
            let s = sensing_probs(&p.validate().unwrap()).unwrap();
            prop_assert!(s.p_detection >= s.p_false_alarm);
            prop_assert!((0.0..=1.0).contains(&s.p_false_alarm));
            prop_assert!((0.0..=1.0).contains(&s.p_detection));
        }
    }
}
