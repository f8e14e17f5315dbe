//! Cross-checks against independent implementations: nalgebra for the linear
//! algebra, direct Monte Carlo for the probability closed forms.

mod common;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cr_feedback_ec::chain::{build_chain, steady_state, Matrix, NUM_STATES};
use cr_feedback_ec::ec::{effective_capacity_of, spectral_radius, PhiMatrix};
use cr_feedback_ec::params::{SchemeKind, SystemParams};
use cr_feedback_ec::sim::monte_carlo_sensing;
use cr_feedback_ec::specfun::sensing_probs;

use common::{random_param_sets, rel_err, table1};

fn nalgebra_spectral_radius(m: &Matrix) -> f64 {
    let a = DMatrix::from_fn(NUM_STATES, NUM_STATES, |i, j| m[i][j]);
    a.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn nalgebra_stationary(r: &Matrix) -> Vec<f64> {
    // (Rᵀ − I)π = 0 with one equation swapped for Σπ = 1.
    let mut a = DMatrix::from_fn(NUM_STATES, NUM_STATES, |i, j| r[j][i] - if i == j { 1.0 } else { 0.0 });
    let mut b = DVector::zeros(NUM_STATES);
    a.row_mut(NUM_STATES - 1).fill(1.0);
    b[NUM_STATES - 1] = 1.0;
    a.lu().solve(&b).expect("irreducible chain").iter().copied().collect()
}

#[test]
fn spectral_radius_matches_eigen_solver_on_random_matrices() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let m: Matrix = std::array::from_fn(|_| std::array::from_fn(|_| rng.random::<f64>() * rng.random::<f64>()));
        let ours = spectral_radius(&m).unwrap();
        let want = nalgebra_spectral_radius(&m);
        assert!(rel_err(ours, want) <= 1e-8, "{ours} vs {want}");
    }
}

#[test]
fn spectral_radius_matches_eigen_solver_on_phi_r() {
    let mut sets = vec![table1()];
    sets.extend(random_param_sets(30, 12));
    for params in sets {
        let sensing = sensing_probs(&params).unwrap();
        for scheme in SchemeKind::ALL {
            let chain = build_chain(&params, scheme, &sensing);
            for theta in [1e-3, params.qos_exponent, 0.1] {
                let phi_r = PhiMatrix::for_chain(&chain, theta).apply(&chain.transition);
                let want = nalgebra_spectral_radius(&phi_r);
                let ec = effective_capacity_of(&chain, theta).unwrap();
                assert!(rel_err(ec.spectral_radius, want) <= 1e-8, "{} vs {want}", ec.spectral_radius);
                let want_ec = -want.ln() / theta;
                assert!((ec.ec_bits_per_slot - want_ec).abs() <= 1e-6 * want_ec.max(1.0));
            }
        }
    }
}

#[test]
fn stationary_distribution_matches_lu_solve() {
    let mut sets = vec![table1()];
    sets.extend(random_param_sets(50, 13));
    for params in sets {
        let sensing = sensing_probs(&params).unwrap();
        for scheme in SchemeKind::ALL {
            let chain = build_chain(&params, scheme, &sensing);
            let ours = steady_state(&chain).unwrap().pi;
            let want = nalgebra_stationary(&chain.transition);
            for (a, b) in ours.iter().zip(&want) {
                assert!((a - b).abs() <= 1e-12, "{ours:?} vs {want:?}");
            }
        }
    }
}

#[test]
fn sensing_closed_forms_match_symbol_level_at_other_thresholds() {
    const TRIALS: u64 = 100_000;
    for (lambda, signal) in [(1.05, 1.0), (1.5, 0.5), (2.0, 1.2)] {
        let mut p = SystemParams::table1();
        p.detector_threshold = lambda;
        p.pu_signal_var = signal;
        let p = p.validate().unwrap();
        let closed = sensing_probs(&p).unwrap();
        let (fa, det) = monte_carlo_sensing(&p, TRIALS, 5);
        for (est, q) in [(fa, closed.p_false_alarm), (det, closed.p_detection)] {
            let se = (q * (1.0 - q) / TRIALS as f64).sqrt();
            let got = est.value().unwrap();
            assert!((got - q).abs() <= 3.0 * se.max(1e-12), "lambda {lambda}: {got} vs {q}");
        }
    }
}
