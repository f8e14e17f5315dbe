//! The 10-state secondary-link Markov chain shared by DPL and TPL.
//!
//! States 1–8 pair a sensing outcome (B-B, MD, FA, I-I) with the ON/OFF state
//! of the secondary channel; states 9 and 10 are the slot after an accessed
//! NACK, where the SU skips sensing and transmits for the full frame. Code
//! indexes states from 0; docs and dumps use the 1-based numbering.

use std::f64::consts::LN_2;
use std::fmt;
use std::io::Write;

use crate::error::{Error, Result};
use crate::outage::{nack_access_prob, pu_outage_prob};
use crate::params::{PowerLevel, SchemeKind, SystemParams, ValidatedParams};
use crate::specfun::SensingProbs;

pub const NUM_STATES: usize = 10;

/// States in which the PU transmits (1-based 1, 2, 3, 4, 9, 10).
pub const PU_ACTIVE_STATES: [usize; 6] = [0, 1, 2, 3, 8, 9];

pub type Matrix = [[f64; NUM_STATES]; NUM_STATES];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingOutcome {
    /// Channel busy, detected busy.
    BusyBusy,
    /// Channel busy, detected idle.
    MissedDetection,
    /// Channel idle, detected busy.
    FalseAlarm,
    /// Channel idle, detected idle.
    IdleIdle,
    /// No sensing: slot following an accessed NACK.
    NackSlot,
}

impl fmt::Display for SensingOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensingOutcome::BusyBusy => "B-B",
            SensingOutcome::MissedDetection => "MD",
            SensingOutcome::FalseAlarm => "FA",
            SensingOutcome::IdleIdle => "I-I",
            SensingOutcome::NackSlot => "NACK",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSemantics {
    /// 1-based state number.
    pub index: usize,
    pub pu_active: bool,
    pub sensing_outcome: SensingOutcome,
    pub channel_on: bool,
    pub su_power_level: PowerLevel,
    pub tx_duration_s: f64,
}

/// Fixed state catalog for `scheme`.
pub fn state_catalog(params: &SystemParams, scheme: SchemeKind) -> [StateSemantics; NUM_STATES] {
    use SensingOutcome::*;
    let t = params.frame_duration_s;
    let tx = t - params.sensing_duration_s;
    let rows = [
        (true, BusyBusy, PowerLevel::P1, tx),
        (true, MissedDetection, PowerLevel::P2, tx),
        (false, FalseAlarm, PowerLevel::P1, tx),
        (false, IdleIdle, PowerLevel::P2, tx),
        (true, NackSlot, scheme.nack_level(), t),
    ];
    std::array::from_fn(|i| {
        let (pu_active, sensing_outcome, su_power_level, tx_duration_s) = rows[i / 2];
        StateSemantics {
            index: i + 1,
            pu_active,
            sensing_outcome,
            channel_on: i % 2 == 0,
            su_power_level,
            tx_duration_s,
        }
    })
}

/// Per-scenario SNRs and ON thresholds `α_l = (2^{r/B} − 1)/SNR_l`.
///
/// Scenarios: 1 = P1 with PU interference, 2 = P2 with interference,
/// 3 = P1 clean, 4 = P2 clean, 5 = NACK-slot power with interference
/// (P0 at r0 under TPL; P1 at r1 under DPL, i.e. scenario 1 again).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkThresholds {
    pub snr: [f64; 5],
    pub alpha: [f64; 5],
}

pub fn snr_and_alpha(params: &SystemParams, scheme: SchemeKind) -> LinkThresholds {
    let noisy = params.noise_psd + params.pu_signal_var;
    let clean = params.noise_psd;
    let nack = scheme.nack_level();
    let scenarios = [
        (PowerLevel::P1, noisy),
        (PowerLevel::P2, noisy),
        (PowerLevel::P1, clean),
        (PowerLevel::P2, clean),
        (nack, noisy),
    ];
    let snr = scenarios.map(|(level, n)| params.power(level) / n);
    let alpha = std::array::from_fn(|l| {
        let (level, _) = scenarios[l];
        let need = (params.rate(level) / params.bandwidth_hz * LN_2).exp_m1();
        need / snr[l]
    });
    LinkThresholds { snr, alpha }
}

/// Pr(z > α) for the exponential secondary-link gain with mean σ².
pub fn on_prob(alpha: f64, params: &SystemParams) -> f64 {
    (-alpha / params.fading_ss_mean).exp()
}

fn off_prob(alpha: f64, params: &SystemParams) -> f64 {
    -(-alpha / params.fading_ss_mean).exp_m1()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainModel {
    pub scheme: SchemeKind,
    /// Row-stochastic transition matrix; `transition[i][j]` is the probability of i → j.
    pub transition: Matrix,
    pub states: [StateSemantics; NUM_STATES],
    pub snr: [f64; 5],
    pub alpha: [f64; 5],
    /// Destination probabilities p_1..p_8 from a source with no NACK pending.
    pub base_probs: [f64; 8],
    /// SU rate in force in each state, bits/s.
    pub rates_bps: [f64; NUM_STATES],
    pub frame_duration_s: f64,
    /// Rates (r0, r1, r2) the chain was built with.
    pub rates_used: [f64; 3],
}

impl ChainModel {
    /// Bits delivered in state `i` (0-based): rate × duration when ON, zero when OFF.
    pub fn service_bits(&self, i: usize) -> f64 {
        let s = &self.states[i];
        if s.channel_on {
            self.rates_bps[i] * s.tx_duration_s
        } else {
            0.0
        }
    }

    pub fn service_vector(&self) -> [f64; NUM_STATES] {
        std::array::from_fn(|i| self.service_bits(i))
    }
}

pub fn build_chain(params: &ValidatedParams, scheme: SchemeKind, sensing: &SensingProbs) -> ChainModel {
    let th = snr_and_alpha(params, scheme);
    let rho = params.pu_prior;
    let pd = sensing.p_detection;
    let pf = sensing.p_false_alarm;

    let weights = [rho * pd, rho * (1.0 - pd), (1.0 - rho) * pf, (1.0 - rho) * (1.0 - pf)];
    let base_probs: [f64; 8] = std::array::from_fn(|k| {
        let w = weights[k / 2];
        let alpha = th.alpha[k / 2];
        if k % 2 == 0 {
            w * on_prob(alpha, params)
        } else {
            w * off_prob(alpha, params)
        }
    });

    let nack_on = on_prob(th.alpha[4], params);
    let nack_off = off_prob(th.alpha[4], params);
    let q_busy = nack_access_prob(params, PowerLevel::P1);
    let q_missed = nack_access_prob(params, PowerLevel::P2);

    let mut transition = [[0.0; NUM_STATES]; NUM_STATES];
    for (i, row) in transition.iter_mut().enumerate() {
        let q = match i {
            0 | 1 => q_busy,
            2 | 3 => q_missed,
            // PU idle, or a second attempt whose NACK is not actionable.
            _ => 0.0,
        };
        for k in 0..8 {
            row[k] = base_probs[k] * (1.0 - q);
        }
        row[8] = q * nack_on;
        row[9] = q * nack_off;
    }

    let states = state_catalog(params, scheme);
    let rates_bps = std::array::from_fn(|i| params.rate(states[i].su_power_level));

    ChainModel {
        scheme,
        transition,
        states,
        snr: th.snr,
        alpha: th.alpha,
        base_probs,
        rates_bps,
        frame_duration_s: params.frame_duration_s,
        rates_used: params.su_rates_bps,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub pi: [f64; NUM_STATES],
    /// π renormalized over the PU-active states; zero on PU-idle states.
    /// `None` when the PU-active states carry no stationary mass.
    pub beta: Option<[f64; NUM_STATES]>,
    /// ‖πR − π‖∞ of the returned vector.
    pub residual: f64,
}

const RESIDUAL_TOL: f64 = 1e-10;
const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 100_000;
const PIVOT_TOL: f64 = 1e-12;

/// States that can be entered from some other surviving state.
fn recurrent_candidates(r: &Matrix) -> [bool; NUM_STATES] {
    let mut keep = [true; NUM_STATES];
    loop {
        let mut changed = false;
        for j in 0..NUM_STATES {
            if !keep[j] {
                continue;
            }
            let inbound: f64 = (0..NUM_STATES).filter(|&i| i != j && keep[i]).map(|i| r[i][j]).sum();
            if inbound == 0.0 {
                keep[j] = false;
                changed = true;
            }
        }
        if !changed {
            return keep;
        }
    }
}

/// Solves (Rᵀ − I)π = 0 with the last equation replaced by Σπ = 1.
fn direct_solve(r: &Matrix, idx: &[usize]) -> Option<Vec<f64>> {
    let n = idx.len();
    let mut a = vec![vec![0.0; n + 1]; n];
    for (row, &j) in idx.iter().enumerate() {
        for (col, &i) in idx.iter().enumerate() {
            a[row][col] = r[i][j] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for col in 0..n {
        a[n - 1][col] = 1.0;
    }
    a[n - 1][n] = 1.0;

    for col in 0..n {
        let pivot = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[pivot][col].abs() < PIVOT_TOL {
            return None;
        }
        a.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            if f != 0.0 {
                for k in col..=n {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (a[row][n] - s) / a[row][row];
    }
    Some(x)
}

fn power_solve(r: &Matrix, idx: &[usize]) -> Result<Vec<f64>> {
    let n = idx.len();
    let mut pi = vec![1.0 / n as f64; n];
    let mut change = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let next: Vec<f64> = idx
            .iter()
            .map(|&j| idx.iter().zip(&pi).map(|(&i, p)| p * r[i][j]).sum())
            .collect();
        change = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        pi = next;
        if change <= POWER_TOL {
            return Ok(pi);
        }
    }
    Err(Error::NoStationary(format!(
        "power iteration still moving by {change:e} after {POWER_MAX_ITER} steps (periodic chain?)"
    )))
}

fn residual(r: &Matrix, pi: &[f64; NUM_STATES]) -> f64 {
    (0..NUM_STATES)
        .map(|j| {
            let pr: f64 = (0..NUM_STATES).map(|i| pi[i] * r[i][j]).sum();
            (pr - pi[j]).abs()
        })
        .fold(0.0, f64::max)
}

/// Stationary distribution of the chain.
///
/// States with no inbound probability from the surviving states are excised
/// first and get π = 0 exactly. The rest is solved directly; a near-singular
/// system falls back to power iteration on πR.
pub fn steady_state(chain: &ChainModel) -> Result<SteadyState> {
    let r = &chain.transition;
    let keep = recurrent_candidates(r);
    let idx: Vec<usize> = (0..NUM_STATES).filter(|&i| keep[i]).collect();
    if idx.is_empty() {
        return Err(Error::NoStationary("every state was excised".into()));
    }

    let solved = match direct_solve(r, &idx) {
        Some(x) => x,
        None => power_solve(r, &idx)?,
    };

    let mut pi = [0.0; NUM_STATES];
    for (&i, &v) in idx.iter().zip(&solved) {
        // round-off can leave -1e-18 on states with tiny mass
        pi[i] = v.max(0.0);
    }
    let total: f64 = pi.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NoStationary(format!("stationary vector sums to {total}")));
    }
    pi.iter_mut().for_each(|p| *p /= total);

    let res = residual(r, &pi);
    if res > RESIDUAL_TOL {
        return Err(Error::NoStationary(format!("residual ‖πR − π‖∞ = {res:e}")));
    }

    let active_mass: f64 = PU_ACTIVE_STATES.iter().map(|&i| pi[i]).sum();
    let beta = (active_mass > 0.0).then(|| {
        let mut b = [0.0; NUM_STATES];
        for &i in &PU_ACTIVE_STATES {
            b[i] = pi[i] / active_mass;
        }
        b
    });

    Ok(SteadyState { pi, beta, residual: res })
}

/// Pr(P_sec = P_j | PU transmits) for j = 0, 1, 2.
pub fn power_usage(chain: &ChainModel, steady: &SteadyState) -> Result<[f64; 3]> {
    let beta = steady
        .beta
        .ok_or_else(|| Error::Degenerate("the PU never transmits (no stationary mass on PU-active states)".into()))?;
    let mut usage = [0.0; 3];
    for &i in &PU_ACTIVE_STATES {
        usage[chain.states[i].su_power_level.index()] += beta[i];
    }
    Ok(usage)
}

/// PU success rate per transmission: 1 − Σ_j Pr(outage | P_j)·Pr(P_sec = P_j).
pub fn pu_success_rate(params: &ValidatedParams, scheme: SchemeKind, sensing: &SensingProbs) -> Result<f64> {
    let chain = build_chain(params, scheme, sensing);
    let steady = steady_state(&chain)?;
    success_rate_from(params, &chain, &steady)
}

pub fn success_rate_from(params: &SystemParams, chain: &ChainModel, steady: &SteadyState) -> Result<f64> {
    let usage = power_usage(chain, steady)?;
    let nack: f64 = PowerLevel::ALL
        .iter()
        .map(|&l| pu_outage_prob(params, l) * usage[l.index()])
        .sum();
    Ok(1.0 - nack)
}

/// Writes R, π and β as CSV with 17 significant digits.
pub fn write_dump<W: Write>(chain: &ChainModel, steady: &SteadyState, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["row".to_string()];
    header.extend((1..=NUM_STATES).map(|j| format!("s{j}")));
    w.write_record(&header)?;
    let fmt = |x: f64| format!("{x:.16e}");
    for (i, row) in chain.transition.iter().enumerate() {
        let mut rec = vec![format!("R{}", i + 1)];
        rec.extend(row.iter().map(|&x| fmt(x)));
        w.write_record(&rec)?;
    }
    let mut rec = vec!["pi".to_string()];
    rec.extend(steady.pi.iter().map(|&x| fmt(x)));
    w.write_record(&rec)?;
    let mut rec = vec!["beta".to_string()];
    match steady.beta {
        Some(b) => rec.extend(b.iter().map(|&x| fmt(x))),
        None => rec.extend(std::iter::repeat_n(String::new(), NUM_STATES)),
    }
    w.write_record(&rec)?;
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::sensing_probs;
    use proptest::prelude::*;

    fn table1() -> ValidatedParams {
        SystemParams::table1().validate().unwrap()
    }

    fn row_sum(row: &[f64; NUM_STATES]) -> f64 {
        row.iter().sum()
    }

    #[test]
    fn catalog_layout() {
        let p = table1();
        for scheme in SchemeKind::ALL {
            let s = state_catalog(&p, scheme);
            for (i, st) in s.iter().enumerate() {
                assert_eq!(st.index, i + 1);
                assert_eq!(st.channel_on, st.index % 2 == 1);
                assert_eq!(st.pu_active, PU_ACTIVE_STATES.contains(&i));
            }
            assert_eq!(s[8].tx_duration_s, p.frame_duration_s);
            assert_eq!(s[0].tx_duration_s, p.frame_duration_s - p.sensing_duration_s);
            assert_eq!(s[8].su_power_level, scheme.nack_level());
            assert_eq!(s[2].su_power_level, PowerLevel::P2);
        }
    }

    #[test]
    fn table1_snrs() {
        let th = snr_and_alpha(&table1(), SchemeKind::Tpl);
        assert_eq!(th.snr[..4], [0.125, 0.5, 0.25, 1.0]);
        assert!((th.snr[4] - 0.05).abs() < 1e-16);
        let want = (2f64.powf(1000.0 / 1e5) - 1.0) / 0.125;
        assert!((th.alpha[0] - want).abs() < 1e-14);
        let dpl = snr_and_alpha(&table1(), SchemeKind::Dpl);
        assert_eq!(dpl.snr[4], dpl.snr[0]);
        assert_eq!(dpl.alpha[4], dpl.alpha[0]);
    }

    #[test]
    fn no_interference_makes_clean_and_noisy_snr_equal() {
        let mut p = SystemParams::table1();
        p.pu_signal_var = 0.0;
        let th = snr_and_alpha(&p, SchemeKind::Tpl);
        assert_eq!(th.snr[0], th.snr[2]);
        assert_eq!(th.snr[1], th.snr[3]);
    }

    #[test]
    fn snr1_is_exact_psd_ratio() {
        let p = SystemParams::table1();
        let th = snr_and_alpha(&p, SchemeKind::Dpl);
        assert_eq!(th.snr[0], p.su_power_psd[1] / (p.noise_psd + p.pu_signal_var));
    }

    #[test]
    fn on_probability_edges() {
        let p = SystemParams::table1();
        assert_eq!(on_prob(0.0, &p), 1.0);
        assert!((on_prob(p.fading_ss_mean * LN_2, &p) - 0.5).abs() < 1e-15);
        let mut tiny = SystemParams::table1();
        tiny.su_rates_bps = [1e-9; 3];
        let th = snr_and_alpha(&tiny, SchemeKind::Tpl);
        assert!(th.alpha.iter().all(|&a| on_prob(a, &tiny) > 1.0 - 1e-12));
    }

    #[test]
    fn never_miss_feedback_is_memoryless() {
        let mut p = SystemParams::table1();
        p.feedback_miss_prob = 1.0;
        let p = p.validate().unwrap();
        let s = sensing_probs(&p).unwrap();
        for scheme in SchemeKind::ALL {
            let chain = build_chain(&p, scheme, &s);
            for row in &chain.transition {
                assert_eq!(row[8], 0.0);
                assert_eq!(row[9], 0.0);
                assert_eq!(row[..8], chain.base_probs[..]);
            }
            let ss = steady_state(&chain).unwrap();
            for k in 0..8 {
                assert!((ss.pi[k] - chain.base_probs[k]).abs() < 1e-15);
            }
            assert_eq!(ss.pi[8], 0.0);
            assert_eq!(ss.pi[9], 0.0);
        }
    }

    #[test]
    fn perfect_sensing_empties_md_and_fa_states() {
        let p = table1();
        let chain = build_chain(&p, SchemeKind::Tpl, &SensingProbs::PERFECT);
        assert_eq!(chain.base_probs[2..6], [0.0; 4]);
        let ss = steady_state(&chain).unwrap();
        assert_eq!(ss.pi[2..6], [0.0; 4]);
        assert!(ss.residual <= 1e-10);
    }

    #[test]
    fn nack_states_follow_the_buffer_limit() {
        let p = table1();
        let s = sensing_probs(&p).unwrap();
        let chain = build_chain(&p, SchemeKind::Tpl, &s);
        for i in 4..NUM_STATES {
            assert_eq!(chain.transition[i][8], 0.0);
            assert_eq!(chain.transition[i][9], 0.0);
        }
        assert!(chain.transition[0][8] > 0.0);
        assert!(chain.transition[2][9] > 0.0);
    }

    #[test]
    fn beta_normalization() {
        let p = table1();
        let s = sensing_probs(&p).unwrap();
        let ss = steady_state(&build_chain(&p, SchemeKind::Tpl, &s)).unwrap();
        let b = ss.beta.unwrap();
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        let active: f64 = PU_ACTIVE_STATES.iter().map(|&i| ss.pi[i]).sum();
        assert!((b[8] - ss.pi[8] / active).abs() < 1e-15);
        assert_eq!(b[4..8], [0.0; 4]);
        assert!((ss.pi.iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn silent_pu_has_no_success_rate() {
        let mut p = SystemParams::table1();
        p.pu_prior = 0.0;
        let p = p.validate().unwrap();
        let s = sensing_probs(&p).unwrap();
        let ss = steady_state(&build_chain(&p, SchemeKind::Dpl, &s)).unwrap();
        assert!(ss.beta.is_none());
        assert!(matches!(pu_success_rate(&p, SchemeKind::Dpl, &s), Err(Error::Degenerate(_))));
    }

    #[test]
    fn tpl_collapses_to_dpl_at_equal_low_levels() {
        let mut p = SystemParams::table1();
        p.su_power_psd[0] = p.su_power_psd[1];
        p.su_rates_bps[0] = p.su_rates_bps[1];
        let p = p.validate_boundary().unwrap();
        let s = sensing_probs(&p).unwrap();
        let tpl = build_chain(&p, SchemeKind::Tpl, &s);
        let dpl = build_chain(&p, SchemeKind::Dpl, &s);
        assert_eq!(tpl.transition, dpl.transition);
        assert_eq!(steady_state(&tpl).unwrap().pi, steady_state(&dpl).unwrap().pi);
        assert_eq!(
            pu_success_rate(&p, SchemeKind::Tpl, &s).unwrap(),
            pu_success_rate(&p, SchemeKind::Dpl, &s).unwrap()
        );
    }

    #[test]
    fn dpl_with_perfect_sensing_ignores_epsilon() {
        let rates: Vec<f64> = [0.0, 0.3, 0.9]
            .iter()
            .map(|&eps| {
                let mut p = SystemParams::table1();
                p.feedback_miss_prob = eps;
                let p = p.validate().unwrap();
                let chain = build_chain(&p, SchemeKind::Dpl, &SensingProbs::PERFECT);
                let ss = steady_state(&chain).unwrap();
                assert_eq!(power_usage(&chain, &ss).unwrap()[2], 0.0);
                pu_success_rate(&p, SchemeKind::Dpl, &SensingProbs::PERFECT).unwrap()
            })
            .collect();
        assert_eq!(rates[0], rates[1]);
        assert_eq!(rates[0], rates[2]);
    }

    #[test]
    fn tpl_success_falls_as_p0_grows() {
        let mut prev = f64::INFINITY;
        for k in 0..=10 {
            let mut p = SystemParams::table1();
            p.su_power_psd[0] = 0.025 * k as f64;
            let p = p.validate_boundary().unwrap();
            let s = sensing_probs(&p).unwrap();
            let rate = pu_success_rate(&p, SchemeKind::Tpl, &s).unwrap();
            assert!(rate < prev, "P0 = {}: {rate} !< {prev}", p.su_power_psd[0]);
            prev = rate;
        }
    }

    #[test]
    fn dump_has_header_matrix_and_vectors() {
        let p = table1();
        let s = sensing_probs(&p).unwrap();
        let chain = build_chain(&p, SchemeKind::Tpl, &s);
        let ss = steady_state(&chain).unwrap();
        let mut buf = Vec::new();
        write_dump(&chain, &ss, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 1 + NUM_STATES + 2);
        assert!(lines[0].starts_with("row,s1,"));
        assert!(lines[11].starts_with("pi,"));
        // 17 significant digits round-trip every entry
        let r1: Vec<f64> = lines[1].split(',').skip(1).map(|x| x.parse().unwrap()).collect();
        assert_eq!(r1[..], chain.transition[0][..]);
    }

    fn arb_params() -> impl Strategy<Value = SystemParams> {
        (
            0.0f64..=1.0,
            0.0f64..=1.0,
            0.0f64..4.0,
            0.5f64..3.0,
            (0.0f64..0.2, 0.21f64..0.8, 0.81f64..3.0),
            (100.0f64..5e3, 100.0f64..5e3, 100.0f64..5e3),
            0.1f64..4.0,
        )
            .prop_map(|(rho, eps, sp, lambda, (p0, p1, p2), (r0, r1, r2), mean)| {
                let mut p = SystemParams::table1();
                p.pu_prior = rho;
                p.feedback_miss_prob = eps;
                p.pu_signal_var = sp;
                p.detector_threshold = lambda;
                p.su_power_psd = [p0, p1, p2];
                p.su_rates_bps = [r0, r1, r2];
                p.fading_ss_mean = mean;
                p
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn rows_are_stochastic(p in arb_params()) {
            let p = p.validate().unwrap();
            let s = sensing_probs(&p).unwrap();
            for scheme in SchemeKind::ALL {
                let chain = build_chain(&p, scheme, &s);
                prop_assert!((chain.base_probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
                for row in &chain.transition {
                    prop_assert!((row_sum(row) - 1.0).abs() <= 1e-12);
                    prop_assert!(row.iter().all(|x| (0.0..=1.0).contains(x)));
                }
            }
        }

        #[test]
        fn stationary_vector_is_fixed_point(p in arb_params()) {
            let p = p.validate().unwrap();
            let s = sensing_probs(&p).unwrap();
            for scheme in SchemeKind::ALL {
                let ss = steady_state(&build_chain(&p, scheme, &s)).unwrap();
                prop_assert!(ss.residual <= 1e-10);
                prop_assert!((ss.pi.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn success_falls_with_epsilon(p in arb_params(), d in 0.0f64..0.5) {
            prop_assume!(p.pu_prior > 0.0);
            let mut lo = p.clone();
            let mut hi = p;
            lo.feedback_miss_prob = lo.feedback_miss_prob * 0.5;
            hi.feedback_miss_prob = (lo.feedback_miss_prob + d).min(1.0);
            let lo = lo.validate().unwrap();
            let hi = hi.validate().unwrap();
            let s = sensing_probs(&lo).unwrap();
            for scheme in SchemeKind::ALL {
                let a = pu_success_rate(&lo, scheme, &s).unwrap();
                let b = pu_success_rate(&hi, scheme, &s).unwrap();
                prop_assert!(b <= a + 1e-12, "{scheme}: eps {} -> {a}, eps {} -> {b}",
                    lo.feedback_miss_prob, hi.feedback_miss_prob);
            }
        }
    }
}
