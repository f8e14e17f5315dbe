//! System parameters, validation and the flat TOML configuration format.
//!
//! All powers are carried as power spectral densities (W/Hz), so every SNR is
//! a plain ratio of PSDs and the bandwidth never multiplies a power.
//!
//! Configuration keys map one-to-one onto the fields of [`SystemParams`].
//! Every key is mandatory except `pu_signal_var` (default 1.0),
//! `fading_ss_mean` (default 1.0) and `qos_exponent` (default 0.01).

use std::fmt;
use std::fs;
use std::ops::Deref;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Secondary-user power level. Index order matches `su_power_psd`/`su_rates_bps`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PowerLevel {
    P0 = 0,
    P1 = 1,
    P2 = 2,
}

impl PowerLevel {
    pub const ALL: [PowerLevel; 3] = [PowerLevel::P0, PowerLevel::P1, PowerLevel::P2];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for PowerLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "P{}", self.index())
    }
}

/// Secondary access scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    /// Double power level: after an accessed NACK the SU transmits at P1. P0 and r0 are unused.
    Dpl,
    /// Triple power level: after an accessed NACK the SU drops to P0.
    Tpl,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 2] = [SchemeKind::Dpl, SchemeKind::Tpl];

    /// Power level used in the slot that follows an accessed NACK.
    pub fn nack_level(self) -> PowerLevel {
        match self {
            SchemeKind::Dpl => PowerLevel::P1,
            SchemeKind::Tpl => PowerLevel::P0,
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Dpl => "DPL",
            SchemeKind::Tpl => "TPL",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "dpl" => Ok(SchemeKind::Dpl),
            "tpl" => Ok(SchemeKind::Tpl),
            other => Err(format!("unknown scheme `{other}` (expected dpl or tpl)")),
        }
    }
}

fn default_pu_signal_var() -> f64 {
    1.0
}

fn default_fading_ss_mean() -> f64 {
    1.0
}

fn default_qos_exponent() -> f64 {
    0.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Frame (slot) duration T in seconds.
    pub frame_duration_s: f64,
    /// Sensing window N at the start of each frame, seconds.
    pub sensing_duration_s: f64,
    pub bandwidth_hz: f64,
    /// Prior probability ρ that the PU transmits a new packet in a slot.
    pub pu_prior: f64,
    /// Energy detector threshold λ.
    pub detector_threshold: f64,
    /// Noise PSD σ_n² = N0, shared by the secondary and primary receivers.
    pub noise_psd: f64,
    /// PU signal variance σ_sp² seen at the SU (interference treated as Gaussian noise).
    #[serde(default = "default_pu_signal_var")]
    pub pu_signal_var: f64,
    /// SU power PSDs [P0/B, P1/B, P2/B].
    pub su_power_psd: [f64; 3],
    /// PU power PSD P/B.
    pub pu_power_psd: f64,
    /// SU rates [r0, r1, r2] in bits/s.
    pub su_rates_bps: [f64; 3],
    pub pu_rate_bps: f64,
    /// Rate δ_pp of the exponential primary-link gain |h_pp|².
    pub fading_pp: f64,
    /// Rate δ_sp of the exponential SU→PU interference gain |h_sp|².
    pub fading_sp: f64,
    /// Mean σ² of the exponential secondary-link gain z.
    #[serde(default = "default_fading_ss_mean")]
    pub fading_ss_mean: f64,
    /// QoS exponent θ in 1/bits.
    #[serde(default = "default_qos_exponent")]
    pub qos_exponent: f64,
    /// Probability ε that the SU fails to overhear a NACK.
    pub feedback_miss_prob: f64,
}

impl SystemParams {
    /// Table-1 operating point with P0/B = 0.1, r0 = 500 bps, σ_sp² = 1, σ² = 1, θ = 0.01.
    pub fn table1() -> Self {
        Self {
            frame_duration_s: 0.01,
            sensing_duration_s: 0.003,
            bandwidth_hz: 1e5,
            pu_prior: 0.1,
            detector_threshold: 1.85,
            noise_psd: 1.0,
            pu_signal_var: 1.0,
            su_power_psd: [0.1, 0.25, 1.0],
            pu_power_psd: 100.0,
            su_rates_bps: [500.0, 1000.0, 2000.0],
            pu_rate_bps: 1e5,
            fading_pp: 0.1,
            fading_sp: 0.1,
            fading_ss_mean: 1.0,
            qos_exponent: 0.01,
            feedback_miss_prob: 0.3,
        }
    }

    pub fn power(&self, level: PowerLevel) -> f64 {
        self.su_power_psd[level.index()]
    }

    pub fn rate(&self, level: PowerLevel) -> f64 {
        self.su_rates_bps[level.index()]
    }

    /// Number of complex samples NB in the sensing window, rounded to the nearest integer.
    pub fn sample_count(&self) -> u64 {
        let nb = self.sensing_duration_s * self.bandwidth_hz;
        let rounded = nb.round();
        if (nb - rounded).abs() > 1e-9 * rounded.max(1.0) {
            log::warn!("N*B = {nb} is not an integer sample count; using {rounded}");
        }
        rounded.max(0.0) as u64
    }

    /// Checks every invariant with strict power ordering `0 <= P0 < P1 < P2`.
    pub fn validate(self) -> Result<ValidatedParams> {
        self.check(false)
    }

    /// Like [`validate`](Self::validate) but admits the `P0 == P1` endpoint,
    /// where TPL collapses onto DPL.
    pub fn validate_boundary(self) -> Result<ValidatedParams> {
        self.check(true)
    }

    fn check(self, allow_equal_low_levels: bool) -> Result<ValidatedParams> {
        let mut violations = Vec::new();
        let mut require = |ok: bool, msg: String| {
            if !ok {
                violations.push(msg);
            }
        };
        let finite = |x: f64| x.is_finite();

        let t = self.frame_duration_s;
        let n = self.sensing_duration_s;
        require(
            finite(t) && finite(n) && n > 0.0 && n < t,
            format!("sensing_duration_s/frame_duration_s: need 0 < N < T, got N={n}, T={t}"),
        );
        require(
            finite(self.bandwidth_hz) && self.bandwidth_hz > 0.0,
            format!("bandwidth_hz: must be > 0, got {}", self.bandwidth_hz),
        );
        require(
            (0.0..=1.0).contains(&self.pu_prior),
            format!("pu_prior: must lie in [0, 1], got {}", self.pu_prior),
        );
        require(
            (0.0..=1.0).contains(&self.feedback_miss_prob),
            format!("feedback_miss_prob: must lie in [0, 1], got {}", self.feedback_miss_prob),
        );
        require(
            finite(self.qos_exponent) && self.qos_exponent >= 0.0,
            format!("qos_exponent: must be >= 0, got {}", self.qos_exponent),
        );
        require(
            finite(self.detector_threshold) && self.detector_threshold >= 0.0,
            format!("detector_threshold: must be >= 0, got {}", self.detector_threshold),
        );

        let [p0, p1, p2] = self.su_power_psd;
        let low_ok = if allow_equal_low_levels { p0 <= p1 } else { p0 < p1 };
        require(
            [p0, p1, p2].iter().all(|p| finite(*p)) && p0 >= 0.0 && low_ok && p1 < p2,
            format!(
                "su_power_psd: need 0 <= P0 {} P1 < P2, got [{p0}, {p1}, {p2}]",
                if allow_equal_low_levels { "<=" } else { "<" }
            ),
        );

        for (name, value) in [
            ("noise_psd", self.noise_psd),
            ("pu_power_psd", self.pu_power_psd),
            ("pu_rate_bps", self.pu_rate_bps),
            ("fading_pp", self.fading_pp),
            ("fading_sp", self.fading_sp),
            ("fading_ss_mean", self.fading_ss_mean),
        ] {
            require(finite(value) && value > 0.0, format!("{name}: must be > 0, got {value}"));
        }
        for (i, r) in self.su_rates_bps.iter().enumerate() {
            require(finite(*r) && *r > 0.0, format!("su_rates_bps[{i}]: must be > 0, got {r}"));
        }
        require(
            finite(self.pu_signal_var) && self.pu_signal_var >= 0.0,
            format!("pu_signal_var: must be >= 0, got {}", self.pu_signal_var),
        );

        if violations.is_empty() {
            let nb = (n * self.bandwidth_hz).round();
            if nb < 1.0 {
                violations.push(format!("sensing window holds {nb} samples; need N*B >= 1"));
            }
        }

        if violations.is_empty() {
            Ok(ValidatedParams(self))
        } else {
            Err(Error::InvalidParams(violations))
        }
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat parameter struct always serializes")
    }
}

/// Parameter set that passed validation. Immutable; derefs to [`SystemParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedParams(SystemParams);

impl ValidatedParams {
    pub fn into_inner(self) -> SystemParams {
        self.0
    }

    pub fn params(&self) -> &SystemParams {
        &self.0
    }
}

impl Deref for ValidatedParams {
    type Target = SystemParams;

    fn deref(&self) -> &SystemParams {
        &self.0
    }
}

pub fn load_config(path: impl AsRef<Path>) -> Result<SystemParams> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    SystemParams::from_toml_str(&text).map_err(|e| Error::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn save_config(params: &SystemParams, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, params.to_toml_string()).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_is_valid() {
        let p = SystemParams::table1().validate().unwrap();
        assert_eq!(p.sample_count(), 300);
    }

    #[test]
    fn equal_low_levels_need_boundary_flag() {
        let mut p = SystemParams::table1();
        p.su_power_psd[0] = p.su_power_psd[1];
        let err = p.clone().validate().unwrap_err();
        assert!(err.to_string().contains("su_power_psd"));
        assert!(p.validate_boundary().is_ok());
    }

    #[test]
    fn sensing_window_longer_than_frame_is_rejected() {
        let mut p = SystemParams::table1();
        p.sensing_duration_s = p.frame_duration_s;
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("0 < N < T"), "{err}");
    }

    #[test]
    fn every_violation_is_reported() {
        let mut p = SystemParams::table1();
        p.pu_prior = 1.5;
        p.fading_sp = 0.0;
        p.su_rates_bps[2] = -1.0;
        match p.validate() {
            Err(Error::InvalidParams(v)) => {
                assert_eq!(v.len(), 3, "{v:?}");
                assert!(v.iter().any(|m| m.starts_with("pu_prior")));
                assert!(v.iter().any(|m| m.starts_with("fading_sp")));
                assert!(v.iter().any(|m| m.starts_with("su_rates_bps[2]")));
            }
            other => panic!("expected InvalidParams, got {other:?}"),
        }
    }

    #[test]
    fn nan_is_rejected() {
        let mut p = SystemParams::table1();
        p.pu_prior = f64::NAN;
        assert!(p.validate().is_err());
    }

    #[test]
    fn missing_epsilon_names_the_key() {
        let text = SystemParams::table1()
            .to_toml_string()
            .lines()
            .filter(|l| !l.starts_with("feedback_miss_prob"))
            .collect::<Vec<_>>()
            .join("\n");
        let err = SystemParams::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("feedback_miss_prob"), "{err}");
    }

    #[test]
    fn defaulted_keys_may_be_omitted() {
        let text = SystemParams::table1()
            .to_toml_string()
            .lines()
            .filter(|l| {
                !l.starts_with("pu_signal_var")
                    && !l.starts_with("fading_ss_mean")
                    && !l.starts_with("qos_exponent")
            })
            .collect::<Vec<_>>()
            .join("\n");
        assert_eq!(SystemParams::from_toml_str(&text).unwrap(), SystemParams::table1());
    }

    #[test]
    fn unknown_key_is_an_error() {
        let text = format!("{}\nbogus = 1.0\n", SystemParams::table1().to_toml_string());
        let err = SystemParams::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn scheme_parses_case_insensitively() {
        assert_eq!("TPL".parse::<SchemeKind>().unwrap(), SchemeKind::Tpl);
        assert_eq!("dpl".parse::<SchemeKind>().unwrap(), SchemeKind::Dpl);
        assert!("qpl".parse::<SchemeKind>().is_err());
    }
}
