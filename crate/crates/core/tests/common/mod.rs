#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cr_feedback_ec::params::{SystemParams, ValidatedParams};

/// Draws a valid parameter set well away from the validation boundaries.
pub fn random_params(rng: &mut ChaCha8Rng) -> ValidatedParams {
    let bandwidth_hz: f64 = [1e4, 5e4, 1e5, 2e5][rng.random_range(0..4)];
    let frame_duration_s: f64 = rng.random_range(0.005..0.02);
    let max_nb = (0.5 * frame_duration_s * bandwidth_hz).floor() as u64;
    let nb = rng.random_range(10..=max_nb.clamp(10, 600));
    let p1 = rng.random_range(0.05..0.5);
    SystemParams {
        frame_duration_s,
        sensing_duration_s: nb as f64 / bandwidth_hz,
        bandwidth_hz,
        pu_prior: rng.random_range(0.02..0.98),
        detector_threshold: rng.random_range(0.8..3.0),
        noise_psd: rng.random_range(0.5..2.0),
        pu_signal_var: rng.random_range(0.0..3.0),
        su_power_psd: [rng.random_range(0.0..p1), p1, p1 + rng.random_range(0.1..2.0)],
        pu_power_psd: rng.random_range(5.0..200.0),
        su_rates_bps: [
            rng.random_range(0.002..0.05) * bandwidth_hz,
            rng.random_range(0.002..0.05) * bandwidth_hz,
            rng.random_range(0.002..0.1) * bandwidth_hz,
        ],
        pu_rate_bps: rng.random_range(0.1..1.5) * bandwidth_hz,
        fading_pp: rng.random_range(0.02..2.0),
        fading_sp: rng.random_range(0.02..2.0),
        fading_ss_mean: rng.random_range(0.2..5.0),
        qos_exponent: rng.random_range(1e-4..0.1),
        feedback_miss_prob: rng.random_range(0.0..1.0),
    }
    .validate()
    .expect("generator stays inside the valid region")
}

pub fn random_param_sets(count: usize, seed: u64) -> Vec<ValidatedParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_params(&mut rng)).collect()
}

pub fn table1() -> ValidatedParams {
    SystemParams::table1().validate().unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Scratch directory under the target tree, emptied on creation.
pub fn scratch_dir(name: &str) -> std::path::PathBuf {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
