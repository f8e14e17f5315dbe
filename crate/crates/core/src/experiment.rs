//! Parameter sweeps over the analytical model with optional protocol
//! simulation, written out as CSV (the contract) plus an SVG plot.
//!
//! Four presets reproduce the evaluation figures: `fig2` and `fig5` plot SU
//! effective capacity against P0, `fig3` and `fig4` the PU success rate, with
//! error-free (`ε = 0`) and erroneous (`ε = 0.3`) feedback access
//! respectively.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::chain::pu_success_rate;
use crate::ec::effective_capacity;
use crate::error::{Error, Result};
use crate::params::{load_config, SchemeKind, SystemParams};
use crate::sim::{simulate_protocol, SimConfig};
use crate::specfun::{sensing_probs, SensingProbs};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVariable {
    /// Lowest SU power PSD P0/B.
    P0,
    /// Feedback miss probability ε.
    Epsilon,
    /// QoS exponent θ.
    Theta,
    /// Detector threshold λ.
    Lambda,
}

impl SweepVariable {
    pub fn column(self) -> &'static str {
        match self {
            SweepVariable::P0 => "p0_psd",
            SweepVariable::Epsilon => "epsilon",
            SweepVariable::Theta => "theta",
            SweepVariable::Lambda => "lambda",
        }
    }

    pub fn apply(self, params: &mut SystemParams, value: f64) {
        match self {
            SweepVariable::P0 => params.su_power_psd[0] = value,
            SweepVariable::Epsilon => params.feedback_miss_prob = value,
            SweepVariable::Theta => params.qos_exponent = value,
            SweepVariable::Lambda => params.detector_threshold = value,
        }
    }
}

impl FromStr for SweepVariable {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "p0" => Ok(SweepVariable::P0),
            "eps" | "epsilon" => Ok(SweepVariable::Epsilon),
            "theta" => Ok(SweepVariable::Theta),
            "lambda" => Ok(SweepVariable::Lambda),
            other => Err(format!("unknown sweep variable `{other}` (expected p0, eps, theta or lambda)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensingMode {
    /// Energy detector with the configured threshold.
    Model,
    /// `P_f = 0`, `P_d = 1`.
    Perfect,
}

impl fmt::Display for SensingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensingMode::Model => "model",
            SensingMode::Perfect => "perfect",
        })
    }
}

impl FromStr for SensingMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "model" => Ok(SensingMode::Model),
            "perfect" => Ok(SensingMode::Perfect),
            other => Err(format!("unknown sensing mode `{other}` (expected model or perfect)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    EffectiveCapacity,
    SuccessRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSettings {
    pub slots: u64,
    pub trajectories: u64,
    pub seed: u64,
}

impl Default for SimSettings {
    fn default() -> Self {
        Self { slots: 1_000, trajectories: 100, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub name: String,
    pub description: String,
    /// Base configuration; the built-in Table-1 set when `None`.
    pub config: Option<PathBuf>,
    pub sweep: SweepVariable,
    pub grid: Vec<f64>,
    pub schemes: Vec<SchemeKind>,
    pub sensing: Vec<SensingMode>,
    /// Overrides `feedback_miss_prob` from the base configuration.
    pub feedback_miss_prob: Option<f64>,
    /// Sets r0 = r1, so a TPL point at P0 = P1 is the DPL chain.
    pub tie_low_rate: bool,
    pub plot_metric: Metric,
    /// Protocol simulation next to every analytical point; `None` for analytical only.
    pub simulation: Option<SimSettings>,
}

pub const PRESETS: [&str; 4] = ["fig2", "fig3", "fig4", "fig5"];

/// Number of P0 points in the preset sweeps.
pub const PRESET_POINTS: usize = 21;

pub fn list_presets() -> &'static [&'static str] {
    &PRESETS
}

struct PresetSpec {
    description: &'static str,
    epsilon: f64,
    sensing: &'static [SensingMode],
    metric: Metric,
}

fn preset_spec(name: &str) -> Result<PresetSpec> {
    use SensingMode::*;
    Ok(match name {
        "fig2" => PresetSpec {
            description: "Secondary user EC for the error-free feedback access case, DPL and TPL",
            epsilon: 0.0,
            sensing: &[Model],
            metric: Metric::EffectiveCapacity,
        },
        "fig3" => PresetSpec {
            description: "PU success rate for the error-free feedback access case, DPL and TPL, \
                          energy-detector and perfect sensing",
            epsilon: 0.0,
            sensing: &[Model, Perfect],
            metric: Metric::SuccessRate,
        },
        "fig4" => PresetSpec {
            description: "PU success rate for the erroneous feedback access case, DPL and TPL, \
                          energy-detector and perfect sensing",
            epsilon: 0.3,
            sensing: &[Model, Perfect],
            metric: Metric::SuccessRate,
        },
        "fig5" => PresetSpec {
            description: "Secondary user EC for the erroneous feedback access case, DPL and TPL",
            epsilon: 0.3,
            sensing: &[Model],
            metric: Metric::EffectiveCapacity,
        },
        other => return Err(Error::UnknownPreset(other.to_string())),
    })
}

/// `count` evenly spaced points from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..count)
            .map(|k| {
                if k == count - 1 {
                    stop
                } else {
                    start + (stop - start) * k as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Text listing a preset's deviations from the base configuration.
pub fn describe(name: &str) -> Result<String> {
    let spec = preset_spec(name)?;
    let sensing: Vec<String> = spec.sensing.iter().map(ToString::to_string).collect();
    Ok(format!(
        "{name}: {}\n  feedback_miss_prob (epsilon) = {}\n  sweep: P0/B over {PRESET_POINTS} evenly spaced points in [0, P1/B]\n  \
         r0 = r1 (TPL meets DPL at P0 = P1)\n  schemes: DPL, TPL\n  sensing: {}\n  plotted: {}\n  all other parameters from the base configuration (Table-1 defaults, theta = 0.01)",
        spec.description,
        spec.epsilon,
        sensing.join(", "),
        match spec.metric {
            Metric::EffectiveCapacity => "effective capacity (bits/s)",
            Metric::SuccessRate => "PU success rate per transmission",
        }
    ))
}

fn base_params(config: Option<&Path>) -> Result<SystemParams> {
    match config {
        Some(path) => load_config(path),
        None => Ok(SystemParams::table1()),
    }
}

impl Experiment {
    pub fn preset(name: &str, config: Option<PathBuf>) -> Result<Self> {
        let spec = preset_spec(name)?;
        let base = base_params(config.as_deref())?;
        Ok(Self {
            name: name.to_string(),
            description: spec.description.to_string(),
            config,
            sweep: SweepVariable::P0,
            grid: linspace(0.0, base.su_power_psd[1], PRESET_POINTS),
            schemes: SchemeKind::ALL.to_vec(),
            sensing: spec.sensing.to_vec(),
            feedback_miss_prob: Some(spec.epsilon),
            tie_low_rate: true,
            plot_metric: spec.metric,
            simulation: Some(SimSettings::default()),
        })
    }

    fn check(&self, base: &SystemParams) -> Result<()> {
        let bad = |msg: String| Err(Error::Experiment(format!("{}: {msg}", self.name)));
        if self.grid.is_empty() {
            return bad("sweep grid is empty".into());
        }
        if self.grid.iter().any(|v| !v.is_finite()) {
            return bad("sweep grid has non-finite values".into());
        }
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return bad("sweep grid must be strictly increasing".into());
        }
        if self.sweep == SweepVariable::P0 {
            let p1 = base.su_power_psd[1];
            if self.grid[0] < 0.0 || self.grid[self.grid.len() - 1] > p1 {
                return bad(format!("P0 grid must lie within [0, P1/B = {p1}]"));
            }
        }
        if self.schemes.is_empty() || self.sensing.is_empty() {
            return bad("need at least one scheme and one sensing mode".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimColumns {
    pub ec_bps: Option<f64>,
    pub ec_half_width_bps: Option<f64>,
    pub success: Option<f64>,
    pub success_half_width: Option<f64>,
    pub success_per_packet: Option<f64>,
    pub success_per_packet_half_width: Option<f64>,
    /// Simulated minus analytical per-transmission success rate.
    pub fidelity_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub scheme: SchemeKind,
    pub sensing: SensingMode,
    pub value: f64,
    pub epsilon: f64,
    pub ec_bps: f64,
    /// `None` when the PU never transmits.
    pub success: Option<f64>,
    pub sim: Option<SimColumns>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
    pub plot_path: Option<PathBuf>,
    pub rows: Vec<ExperimentRow>,
}

fn point_seed(seed: u64, index: usize) -> u64 {
    seed.wrapping_add((index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// Evaluates one sweep point through the public library API.
pub fn evaluate_point(
    base: &SystemParams,
    exp: &Experiment,
    scheme: SchemeKind,
    sensing_mode: SensingMode,
    value: f64,
    sim_seed: Option<u64>,
) -> Result<ExperimentRow> {
    let mut params = base.clone();
    if let Some(eps) = exp.feedback_miss_prob {
        params.feedback_miss_prob = eps;
    }
    if exp.tie_low_rate {
        params.su_rates_bps[0] = params.su_rates_bps[1];
    }
    exp.sweep.apply(&mut params, value);
    let params = if exp.sweep == SweepVariable::P0 {
        params.validate_boundary()?
    } else {
        params.validate()?
    };
    let sensing = match sensing_mode {
        SensingMode::Model => sensing_probs(&params)?,
        SensingMode::Perfect => SensingProbs::PERFECT,
    };

    let ec_bps = effective_capacity(&params, scheme, &sensing)?.ec_bits_per_sec;
    let success = match pu_success_rate(&params, scheme, &sensing) {
        Ok(s) => Some(s),
        Err(Error::Degenerate(_)) => None,
        Err(e) => return Err(e),
    };

    let sim = match (exp.simulation, sim_seed) {
        (Some(settings), Some(seed)) => {
            let cfg = SimConfig::protocol(settings.slots, settings.trajectories, seed);
            let rep = simulate_protocol(&params, scheme, &sensing, &cfg)?;
            let tx = rep.success_per_transmission;
            let pk = rep.success_per_packet;
            Some(SimColumns {
                ec_bps: rep.empirical_ec_bits_per_slot.map(|x| x / params.frame_duration_s),
                ec_half_width_bps: rep.ec_half_width.map(|x| x / params.frame_duration_s),
                success: tx.value(),
                success_half_width: tx.half_width(),
                success_per_packet: pk.value(),
                success_per_packet_half_width: pk.half_width(),
                fidelity_gap: tx.value().zip(success).map(|(e, a)| e - a),
            })
        }
        _ => None,
    };

    Ok(ExperimentRow {
        scheme,
        sensing: sensing_mode,
        value,
        epsilon: params.feedback_miss_prob,
        ec_bps,
        success,
        sim,
    })
}

/// Evaluates every (scheme, sensing, grid value) point, in that nesting order.
pub fn evaluate(exp: &Experiment) -> Result<Vec<ExperimentRow>> {
    let base = base_params(exp.config.as_deref())?;
    exp.check(&base)?;
    let mut points = Vec::new();
    for &scheme in &exp.schemes {
        for &sensing in &exp.sensing {
            for &value in &exp.grid {
                points.push((scheme, sensing, value));
            }
        }
    }
    points
        .par_iter()
        .enumerate()
        .map(|(i, &(scheme, sensing, value))| {
            let seed = exp.simulation.map(|s| point_seed(s.seed, i));
            evaluate_point(&base, exp, scheme, sensing, value, seed)
        })
        .collect()
}

/// Twelve significant digits; empty for missing values.
fn fmt12(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.11e}")).unwrap_or_default()
}

pub fn write_csv<W: std::io::Write>(exp: &Experiment, rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "scheme",
        "sensing",
        exp.sweep.column(),
        "ec_analytical_bps",
        "success_rate_analytical",
    ];
    if exp.simulation.is_some() {
        header.extend([
            "ec_sim_bps",
            "ec_sim_half_width_bps",
            "success_rate_sim",
            "success_rate_sim_half_width",
            "success_per_packet_sim",
            "success_per_packet_sim_half_width",
            "fidelity_gap",
        ]);
    }
    w.write_record(&header)?;
    for row in rows {
        let mut rec = vec![
            row.scheme.to_string(),
            row.sensing.to_string(),
            fmt12(Some(row.value)),
            fmt12(Some(row.ec_bps)),
            fmt12(row.success),
        ];
        if exp.simulation.is_some() {
            let s = row.sim.as_ref();
            rec.extend([
                fmt12(s.and_then(|s| s.ec_bps)),
                fmt12(s.and_then(|s| s.ec_half_width_bps)),
                fmt12(s.and_then(|s| s.success)),
                fmt12(s.and_then(|s| s.success_half_width)),
                fmt12(s.and_then(|s| s.success_per_packet)),
                fmt12(s.and_then(|s| s.success_per_packet_half_width)),
                fmt12(s.and_then(|s| s.fidelity_gap)),
            ]);
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

pub fn summary(exp: &Experiment, rows: &[ExperimentRow]) -> String {
    let mut out = format!("experiment: {}\n{}\n", exp.name, exp.description);
    out.push_str(&format!(
        "sweep: {} over {} points [{}, {}]\n",
        exp.sweep.column(),
        exp.grid.len(),
        exp.grid[0],
        exp.grid[exp.grid.len() - 1]
    ));
    if let Some(eps) = exp.feedback_miss_prob {
        out.push_str(&format!("feedback_miss_prob = {eps}\n"));
    }
    if exp.tie_low_rate {
        out.push_str("r0 = r1\n");
    }
    let Some(settings) = exp.simulation else {
        out.push_str("simulation: disabled\n");
        return out;
    };
    out.push_str(&format!(
        "simulation: protocol mode, {} trajectories x {} slots, seed {}\n",
        settings.trajectories, settings.slots, settings.seed
    ));
    out.push_str(
        "fidelity gap = simulated - analytical PU success per transmission\n\
         (the analytical chain returns a missed-NACK slot to the prior; the protocol retransmits)\n",
    );
    for &scheme in &exp.schemes {
        for &sensing in &exp.sensing {
            let gaps: Vec<(f64, f64, f64)> = rows
                .iter()
                .filter(|r| r.scheme == scheme && r.sensing == sensing)
                .filter_map(|r| {
                    let s = r.sim.as_ref()?;
                    Some((r.value, s.fidelity_gap?, s.success_half_width.unwrap_or(f64::NAN)))
                })
                .collect();
            if gaps.is_empty() {
                continue;
            }
            let worst = gaps.iter().map(|g| g.1.abs()).fold(0.0, f64::max);
            let mean = gaps.iter().map(|g| g.1).sum::<f64>() / gaps.len() as f64;
            out.push_str(&format!("{scheme} / {sensing}: mean gap {mean:+.3e}, max |gap| {worst:.3e}\n"));
            for (v, g, hw) in gaps {
                out.push_str(&format!("  {} = {v:.6}: gap {g:+.3e} (sim half-width {hw:.2e})\n", exp.sweep.column()));
            }
        }
    }
    out
}

/// Runs the sweep and writes `<name>.csv`, `<name>_summary.txt` and, when the
/// `plot` feature is enabled, `<name>.svg` into `out_dir`.
pub fn run_experiment(exp: &Experiment, out_dir: impl AsRef<Path>) -> Result<ExperimentOutput> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir).map_err(|source| Error::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let rows = evaluate(exp)?;

    let csv_path = out_dir.join(format!("{}.csv", exp.name));
    let file = fs::File::create(&csv_path).map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;
    write_csv(exp, &rows, std::io::BufWriter::new(file))?;

    let summary_path = out_dir.join(format!("{}_summary.txt", exp.name));
    fs::write(&summary_path, summary(exp, &rows)).map_err(|source| Error::Io {
        path: summary_path.clone(),
        source,
    })?;

    let plot_path = plot(exp, &rows, out_dir)?;
    Ok(ExperimentOutput {
        csv_path,
        summary_path,
        plot_path,
        rows,
    })
}

#[cfg(feature = "plot")]
fn plot(exp: &Experiment, rows: &[ExperimentRow], out_dir: &Path) -> Result<Option<PathBuf>> {
    let path = out_dir.join(format!("{}.svg", exp.name));
    crate::plot::render(exp, rows, &path)?;
    Ok(Some(path))
}

#[cfg(not(feature = "plot"))]
fn plot(exp: &Experiment, _rows: &[ExperimentRow], _out_dir: &Path) -> Result<Option<PathBuf>> {
    log::warn!("{}: built without the `plot` feature; writing CSV only", exp.name);
    Ok(None)
}
