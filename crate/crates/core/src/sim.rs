//! Monte Carlo estimators used to cross-check the analytical model.
//!
//! Every random stream is a ChaCha8 generator keyed by the run seed and
//! selected by a 64-bit stream id (trajectory or chunk index), so results do
//! not depend on thread scheduling. Per-trajectory results are reduced in
//! index order.
//!
//! Two simulators are provided:
//!
//! * chain sampling walks the analytical transition matrix directly;
//! * protocol mode plays out the actual slot-level DPL/TPL protocol, where a
//!   PU whose first attempt failed retransmits with probability one. The
//!   analytical chain instead sends a missed-NACK slot back to the prior-ρ
//!   states, so the two differ when `ε > 0`; [`protocol_fidelity`] measures
//!   that gap.

use std::f64::consts::LN_2;
use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::chain::{build_chain, pu_success_rate, ChainModel, NUM_STATES};
use crate::error::{Error, Result};
use crate::params::{PowerLevel, SchemeKind, SystemParams, ValidatedParams};
use crate::specfun::SensingProbs;

/// Fewer successes or failures than this and no interval is reported.
pub const MIN_OUTCOMES: u64 = 100;

const Z95: f64 = 1.959_963_984_540_054;

/// Stream ids at or above this are reserved for sensing Monte Carlo chunks.
const SENSING_STREAM_BASE: u64 = 1 << 62;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimMode {
    ChainSampling,
    Protocol,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingModel {
    /// Busy/idle decisions drawn with the supplied `P_d`/`P_f`.
    Bernoulli,
    /// Draw NB complex Gaussian samples and threshold their mean energy.
    SymbolLevel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub mode: SimMode,
    /// Slots per trajectory.
    pub slots: u64,
    pub trajectories: u64,
    pub seed: u64,
    pub sensing_model: SensingModel,
}

impl SimConfig {
    pub fn chain(slots: u64, trajectories: u64, seed: u64) -> Self {
        Self {
            mode: SimMode::ChainSampling,
            slots,
            trajectories,
            seed,
            sensing_model: SensingModel::Bernoulli,
        }
    }

    pub fn protocol(slots: u64, trajectories: u64, seed: u64) -> Self {
        Self {
            mode: SimMode::Protocol,
            slots,
            trajectories,
            seed,
            sensing_model: SensingModel::Bernoulli,
        }
    }

    fn check(&self) -> Result<()> {
        if self.slots == 0 || self.trajectories == 0 {
            return Err(Error::Domain {
                function: "simulation",
                detail: format!("need slots >= 1 and trajectories >= 1, got {} x {}", self.slots, self.trajectories),
            });
        }
        Ok(())
    }
}

/// Binomial proportion with a 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Estimate {
    pub successes: u64,
    pub trials: u64,
}

impl Estimate {
    pub fn value(&self) -> Option<f64> {
        (self.trials > 0).then(|| self.successes as f64 / self.trials as f64)
    }

    pub fn std_error(&self) -> Option<f64> {
        let p = self.value()?;
        Some((p * (1.0 - p) / self.trials as f64).sqrt())
    }

    /// `None` (flagged wide) until both outcomes have been seen [`MIN_OUTCOMES`] times.
    pub fn half_width(&self) -> Option<f64> {
        let failures = self.trials - self.successes;
        if self.successes < MIN_OUTCOMES || failures < MIN_OUTCOMES {
            return None;
        }
        self.std_error().map(|se| Z95 * se)
    }

    fn merge(&mut self, other: Estimate) {
        self.successes += other.successes;
        self.trials += other.trials;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimReport {
    pub mode: SimMode,
    pub state_counts: [u64; NUM_STATES],
    pub empirical_pi: [f64; NUM_STATES],
    pub mean_service_bits_per_slot: f64,
    pub empirical_ec_bits_per_slot: Option<f64>,
    pub ec_half_width: Option<f64>,
    /// Protocol mode only.
    pub success_per_transmission: Estimate,
    /// Protocol mode only; counts packets delivered within two attempts.
    pub success_per_packet: Estimate,
    pub false_alarm: Estimate,
    pub detection: Estimate,
}

impl SimReport {
    /// Total-variation distance between the empirical and a reference distribution.
    pub fn tv_distance(&self, pi: &[f64; NUM_STATES]) -> f64 {
        0.5 * self.empirical_pi.iter().zip(pi).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }

    /// Writes `quantity,value,half_width,samples` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["quantity", "value", "half_width", "samples"])?;
        let num = |x: Option<f64>| x.map(|v| format!("{v:.11e}")).unwrap_or_default();
        let total: u64 = self.state_counts.iter().sum();
        for (i, (p, c)) in self.empirical_pi.iter().zip(&self.state_counts).enumerate() {
            w.write_record([format!("pi_{}", i + 1), num(Some(*p)), String::new(), c.to_string()])?;
        }
        w.write_record([
            "mean_service_bits_per_slot".to_string(),
            num(Some(self.mean_service_bits_per_slot)),
            String::new(),
            total.to_string(),
        ])?;
        w.write_record([
            "ec_bits_per_slot".to_string(),
            num(self.empirical_ec_bits_per_slot),
            num(self.ec_half_width),
            total.to_string(),
        ])?;
        for (name, e) in [
            ("success_per_transmission", &self.success_per_transmission),
            ("success_per_packet", &self.success_per_packet),
            ("false_alarm", &self.false_alarm),
            ("detection", &self.detection),
        ] {
            w.write_record([name.to_string(), num(e.value()), num(e.half_width()), e.trials.to_string()])?;
        }
        w.flush().map_err(|e| Error::Csv(e.into()))?;
        Ok(())
    }
}

impl fmt::Display for SimReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let est = |e: &Estimate| match (e.value(), e.half_width()) {
            (None, _) => "n/a (no samples)".to_string(),
            (Some(v), Some(h)) => format!("{v:.6} ± {h:.2e} (n = {})", e.trials),
            (Some(v), None) => format!("{v:.6} (interval too wide to report, n = {})", e.trials),
        };
        writeln!(f, "mode: {:?}", self.mode)?;
        write!(f, "empirical pi:")?;
        for p in &self.empirical_pi {
            write!(f, " {p:.5}")?;
        }
        writeln!(f)?;
        writeln!(f, "mean service: {:.6} bits/slot", self.mean_service_bits_per_slot)?;
        match (self.empirical_ec_bits_per_slot, self.ec_half_width) {
            (Some(ec), Some(h)) => writeln!(f, "effective capacity: {ec:.6} ± {h:.2e} bits/slot")?,
            (Some(ec), None) => writeln!(f, "effective capacity: {ec:.6} bits/slot")?,
            _ => writeln!(f, "effective capacity: n/a")?,
        }
        if self.mode == SimMode::Protocol {
            writeln!(f, "PU success per transmission: {}", est(&self.success_per_transmission))?;
            writeln!(f, "PU success per packet: {}", est(&self.success_per_packet))?;
            writeln!(f, "false alarm: {}", est(&self.false_alarm))?;
            writeln!(f, "detection: {}", est(&self.detection))?;
        }
        Ok(())
    }
}

/// `−(1/(θ·n))·ln mean_k e^{−θ·S_k}` with log-sum-exp, plus a delta-method half-width.
fn mgf_ec(services: &[f64], theta: f64, slots: u64) -> Result<(f64, Option<f64>)> {
    if !(theta > 0.0) {
        return Err(Error::Domain {
            function: "estimate_ec",
            detail: format!("theta = {theta} must be > 0"),
        });
    }
    let exps: Vec<f64> = services.iter().map(|s| -theta * s).collect();
    let max = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::Degenerate("every e^{-θS} underflowed or was not finite".into()));
    }
    let n = exps.len() as f64;
    let weights: Vec<f64> = exps.iter().map(|x| (x - max).exp()).collect();
    let mean = weights.iter().sum::<f64>() / n;
    let log_mgf = max + mean.ln();
    let scale = theta * slots as f64;
    let ec = -log_mgf / scale;
    let hw = (exps.len() > 1).then(|| {
        let var = weights.iter().map(|w| (w - mean).powi(2)).sum::<f64>() / (n - 1.0);
        Z95 * (var / n).sqrt() / mean / scale
    });
    Ok((ec, hw))
}

struct Cumulative([[f64; NUM_STATES]; NUM_STATES]);

impl Cumulative {
    fn new(r: &[[f64; NUM_STATES]; NUM_STATES]) -> Self {
        Self(r.map(|row| {
            let mut acc = 0.0;
            row.map(|x| {
                acc += x;
                acc
            })
        }))
    }

    fn next(&self, row: usize, u: f64, r: &[[f64; NUM_STATES]; NUM_STATES]) -> usize {
        let cum = &self.0[row];
        cum.iter()
            .position(|&c| u < c)
            .unwrap_or_else(|| (0..NUM_STATES).rev().find(|&j| r[row][j] > 0.0).unwrap_or(0))
    }
}

struct ChainRun {
    counts: [u64; NUM_STATES],
    service: f64,
}

fn run_chain(chain: &ChainModel, cum: &Cumulative, slots: u64, rng: &mut ChaCha8Rng) -> ChainRun {
    let r = &chain.transition;
    let service = chain.service_vector();
    let mut counts = [0u64; NUM_STATES];
    let mut total = 0.0;

    // Initial state from the no-NACK row.
    let mut state = cum.next(NUM_STATES - 1, rng.random::<f64>(), r);
    for _ in 0..slots {
        counts[state] += 1;
        total += service[state];
        let next = cum.next(state, rng.random::<f64>(), r);
        assert!(
            !(state >= 8 && next >= 8),
            "NACK states visited in consecutive slots ({} -> {})",
            state + 1,
            next + 1
        );
        state = next;
    }
    ChainRun { counts, service: total }
}

fn chain_runs(chain: &ChainModel, cfg: &SimConfig) -> Result<Vec<ChainRun>> {
    cfg.check()?;
    let cum = Cumulative::new(&chain.transition);
    Ok((0..cfg.trajectories)
        .into_par_iter()
        .map(|t| {
            let mut rng = stream_rng(cfg.seed, t);
            run_chain(chain, &cum, cfg.slots, &mut rng)
        })
        .collect())
}

fn empty_report(mode: SimMode) -> SimReport {
    SimReport {
        mode,
        state_counts: [0; NUM_STATES],
        empirical_pi: [0.0; NUM_STATES],
        mean_service_bits_per_slot: 0.0,
        empirical_ec_bits_per_slot: None,
        ec_half_width: None,
        success_per_transmission: Estimate::default(),
        success_per_packet: Estimate::default(),
        false_alarm: Estimate::default(),
        detection: Estimate::default(),
    }
}

fn fill_occupancy(report: &mut SimReport, counts: [u64; NUM_STATES], total_service: f64) {
    let total: u64 = counts.iter().sum();
    report.state_counts = counts;
    report.empirical_pi = counts.map(|c| c as f64 / total as f64);
    report.mean_service_bits_per_slot = total_service / total as f64;
}

fn chain_report(runs: &[ChainRun]) -> SimReport {
    let mut counts = [0u64; NUM_STATES];
    let mut service = 0.0;
    for run in runs {
        for (c, r) in counts.iter_mut().zip(&run.counts) {
            *c += r;
        }
        service += run.service;
    }
    let mut report = empty_report(SimMode::ChainSampling);
    fill_occupancy(&mut report, counts, service);
    report
}

/// Walks the transition matrix and reports empirical state frequencies.
pub fn sample_chain(chain: &ChainModel, cfg: &SimConfig) -> Result<SimReport> {
    Ok(chain_report(&chain_runs(chain, cfg)?))
}

/// MGF-based effective capacity over independent chain trajectories, bits per slot.
pub fn estimate_ec(chain: &ChainModel, theta: f64, cfg: &SimConfig) -> Result<SimReport> {
    let runs = chain_runs(chain, cfg)?;
    let mut report = chain_report(&runs);
    let services: Vec<f64> = runs.iter().map(|r| r.service).collect();
    let (ec, hw) = mgf_ec(&services, theta, cfg.slots)?;
    report.empirical_ec_bits_per_slot = Some(ec);
    report.ec_half_width = hw;
    Ok(report)
}

/// Mean energy of `nb` circularly-symmetric complex Gaussian samples of total variance `var`.
fn energy_statistic(rng: &mut ChaCha8Rng, nb: u64, var: f64) -> f64 {
    let sd = (0.5 * var).sqrt();
    let mut acc = 0.0;
    for _ in 0..nb {
        let re: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
        let im: f64 = rng.sample::<f64, _>(StandardNormal) * sd;
        acc += re * re + im * im;
    }
    acc / nb as f64
}

const SENSING_CHUNK: u64 = 10_000;

/// Symbol-level estimates `(P̂_f, P̂_d)` of the energy detector.
pub fn monte_carlo_sensing(params: &ValidatedParams, trials: u64, seed: u64) -> (Estimate, Estimate) {
    let nb = params.sample_count();
    let lambda = params.detector_threshold;
    let chunks = trials.div_ceil(SENSING_CHUNK);
    let run = |var: f64, offset: u64| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut rng = stream_rng(seed, SENSING_STREAM_BASE + offset + c);
                let n = SENSING_CHUNK.min(trials - c * SENSING_CHUNK);
                let hits = (0..n).filter(|_| energy_statistic(&mut rng, nb, var) > lambda).count() as u64;
                Estimate { successes: hits, trials: n }
            })
            .collect::<Vec<_>>()
            .into_iter()
            .fold(Estimate::default(), |mut acc, e| {
                acc.merge(e);
                acc
            })
    };
    let idle = run(params.noise_psd, 0);
    let busy = run(params.noise_psd + params.pu_signal_var, 1 << 40);
    (idle, busy)
}

#[derive(Default)]
struct ProtocolRun {
    counts: [u64; NUM_STATES],
    service: f64,
    transmissions: Estimate,
    packets: Estimate,
    false_alarm: Estimate,
    detection: Estimate,
}

struct ProtocolSampler<'a> {
    params: &'a SystemParams,
    scheme: SchemeKind,
    sensing: &'a SensingProbs,
    model: SensingModel,
    nb: u64,
    gain: Exp<f64>,
    primary: Exp<f64>,
    cross: Exp<f64>,
    rp: f64,
}

impl ProtocolSampler<'_> {
    fn sense_busy(&self, rng: &mut ChaCha8Rng, pu_tx: bool) -> bool {
        match self.model {
            SensingModel::Bernoulli => {
                let p = if pu_tx { self.sensing.p_detection } else { self.sensing.p_false_alarm };
                rng.random::<f64>() < p
            }
            SensingModel::SymbolLevel => {
                let var = self.params.noise_psd + if pu_tx { self.params.pu_signal_var } else { 0.0 };
                energy_statistic(rng, self.nb, var) > self.params.detector_threshold
            }
        }
    }

    fn run(&self, slots: u64, rng: &mut ChaCha8Rng) -> ProtocolRun {
        let p = self.params;
        let b = p.bandwidth_hz;
        let mut out = ProtocolRun::default();
        let mut retransmit_pending = false;
        let mut nack_accessed = false;

        for _ in 0..slots {
            // (a) PU activity; a pending retransmission always goes out.
            let first_attempt = !retransmit_pending && rng.random::<f64>() < p.pu_prior;
            let pu_tx = retransmit_pending || first_attempt;

            // (b) SU power, rate, airtime and chain-state pair.
            let (level, duration, pair) = if nack_accessed {
                (self.scheme.nack_level(), p.frame_duration_s, 4)
            } else {
                let busy = self.sense_busy(rng, pu_tx);
                if pu_tx {
                    out.detection.merge(Estimate { successes: busy as u64, trials: 1 });
                } else {
                    out.false_alarm.merge(Estimate { successes: busy as u64, trials: 1 });
                }
                let pair = match (pu_tx, busy) {
                    (true, true) => 0,
                    (true, false) => 1,
                    (false, true) => 2,
                    (false, false) => 3,
                };
                let level = if busy { PowerLevel::P1 } else { PowerLevel::P2 };
                (level, p.frame_duration_s - p.sensing_duration_s, pair)
            };
            let power = p.power(level);
            let rate = p.rate(level);

            // (c) channel draws
            let z = self.gain.sample(rng);
            let chi_pp = self.primary.sample(rng);
            let chi_sp = self.cross.sample(rng);

            let noise = p.noise_psd + if pu_tx { p.pu_signal_var } else { 0.0 };
            let capacity = b * (1.0 + power / noise * z).log2();
            let on = rate < capacity;
            out.counts[2 * pair + usize::from(!on)] += 1;
            if on {
                out.service += rate * duration;
            }

            // (d) PU outcome and feedback
            nack_accessed = false;
            if pu_tx {
                let sinr = p.pu_power_psd * chi_pp / (p.noise_psd + power * chi_sp);
                let success = self.rp < sinr;
                out.transmissions.merge(Estimate { successes: success as u64, trials: 1 });
                if success {
                    out.packets.merge(Estimate { successes: 1, trials: 1 });
                    retransmit_pending = false;
                } else if first_attempt {
                    retransmit_pending = true;
                    nack_accessed = rng.random::<f64>() >= p.feedback_miss_prob;
                } else {
                    // second failure: dropped, NACK not actionable
                    out.packets.merge(Estimate { successes: 0, trials: 1 });
                    retransmit_pending = false;
                }
            }
        }
        out
    }
}

/// Slot-level simulation of the DPL/TPL protocol.
///
/// `sensing` supplies `P_d`/`P_f` for the Bernoulli sensing model and is
/// ignored in symbol-level mode. The effective capacity estimate uses the
/// configured `qos_exponent` and is only reported when it is positive.
pub fn simulate_protocol(
    params: &ValidatedParams,
    scheme: SchemeKind,
    sensing: &SensingProbs,
    cfg: &SimConfig,
) -> Result<SimReport> {
    cfg.check()?;
    let rate = |r: f64, what: &str| {
        Exp::new(r).map_err(|e| Error::Domain {
            function: "simulate_protocol",
            detail: format!("{what}: {e}"),
        })
    };
    let sampler = ProtocolSampler {
        params,
        scheme,
        sensing,
        model: cfg.sensing_model,
        nb: params.sample_count(),
        gain: rate(1.0 / params.fading_ss_mean, "fading_ss_mean")?,
        primary: rate(params.fading_pp, "fading_pp")?,
        cross: rate(params.fading_sp, "fading_sp")?,
        rp: (params.pu_rate_bps / params.bandwidth_hz * LN_2).exp_m1(),
    };

    let runs: Vec<ProtocolRun> = (0..cfg.trajectories)
        .into_par_iter()
        .map(|t| sampler.run(cfg.slots, &mut stream_rng(cfg.seed, t)))
        .collect();

    let mut report = empty_report(SimMode::Protocol);
    let mut counts = [0u64; NUM_STATES];
    let mut service = 0.0;
    for run in &runs {
        for (c, r) in counts.iter_mut().zip(&run.counts) {
            *c += r;
        }
        service += run.service;
        report.success_per_transmission.merge(run.transmissions);
        report.success_per_packet.merge(run.packets);
        report.false_alarm.merge(run.false_alarm);
        report.detection.merge(run.detection);
    }
    fill_occupancy(&mut report, counts, service);

    if params.qos_exponent > 0.0 {
        let services: Vec<f64> = runs.iter().map(|r| r.service).collect();
        let (ec, hw) = mgf_ec(&services, params.qos_exponent, cfg.slots)?;
        report.empirical_ec_bits_per_slot = Some(ec);
        report.ec_half_width = hw;
    }
    Ok(report)
}

/// Runs the simulator selected by `cfg.mode`.
pub fn simulate(
    params: &ValidatedParams,
    scheme: SchemeKind,
    sensing: &SensingProbs,
    cfg: &SimConfig,
) -> Result<SimReport> {
    match cfg.mode {
        SimMode::ChainSampling => {
            let chain = build_chain(params, scheme, sensing);
            if params.qos_exponent > 0.0 {
                estimate_ec(&chain, params.qos_exponent, cfg)
            } else {
                sample_chain(&chain, cfg)
            }
        }
        SimMode::Protocol => simulate_protocol(params, scheme, sensing, cfg),
    }
}

/// Analytical per-transmission success rate next to the protocol simulator's.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub analytical: f64,
    pub empirical: Estimate,
    /// empirical − analytical; `None` when the PU never transmitted.
    pub gap: Option<f64>,
    pub report: SimReport,
}

pub fn protocol_fidelity(
    params: &ValidatedParams,
    scheme: SchemeKind,
    sensing: &SensingProbs,
    cfg: &SimConfig,
) -> Result<FidelityReport> {
    let analytical = pu_success_rate(params, scheme, sensing)?;
    let report = simulate_protocol(params, scheme, sensing, &SimConfig { mode: SimMode::Protocol, ..*cfg })?;
    let empirical = report.success_per_transmission;
    Ok(FidelityReport {
        analytical,
        empirical,
        gap: empirical.value().map(|v| v - analytical),
        report,
    })
}
