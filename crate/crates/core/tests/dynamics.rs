//! State-vector evolution against dense diagonalisation, and the
//! infinite-time average against direct evaluation.

use msqw::evolver::{
    apply_h, propagate, HamiltonianAction, StateVector, Walker, DEFAULT_TOLERANCE,
};
use msqw::exact::{
    dense_evolve, dense_hamiltonian, p_inf_naive, p_inf_nested, p_inf_nested_with, DegeneracyMode,
    EigenSystem,
};
use msqw::ising::{brute_force_spectrum, energies, sk_instance, IsingProblem};
use msqw::schedule::{build_schedule, gamma_schedule, Stage};
use msqw::stats::SpreadMethod;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_state(n: usize, rng: &mut ChaCha8Rng) -> StateVector {
    let amps = (0..1usize << n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut v = StateVector::from_amplitudes(n, amps).unwrap();
    v.normalize();
    v
}

#[test]
fn propagate_matches_dense_evolution() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for case in 0..25 {
        let n = rng.random_range(1..=8);
        let p = sk_instance(n.max(2), 9, case, false).unwrap();
        let p = if n == 1 {
            IsingProblem::new(vec![0.7], &[]).unwrap()
        } else {
            p
        };
        let gamma = rng.random_range(0.0..3.0);
        let t = rng.random_range(0.0..6.0);
        let v = random_state(p.n(), &mut rng);
        let diag = energies(&p, 24).unwrap();
        let action = HamiltonianAction::new(&diag, gamma).unwrap();
        let fast = propagate(&action, &v, t, DEFAULT_TOLERANCE).unwrap();
        let dense = dense_evolve(&p, gamma, t, &v).unwrap();
        let dev = fast.max_deviation(&dense);
        assert!(
            dev <= 1e-6,
            "case {case}: n={} gamma={gamma} t={t} dev={dev}",
            p.n()
        );
    }
}

#[test]
fn propagate_is_linear() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let p = sk_instance(6, 2, 0, false).unwrap();
    let diag = energies(&p, 24).unwrap();
    let action = HamiltonianAction::new(&diag, 1.3).unwrap();
    let u = random_state(6, &mut rng);
    let v = random_state(6, &mut rng);
    let (a, b) = (Complex64::new(0.3, -1.1), Complex64::new(-0.7, 0.2));
    let combo: Vec<Complex64> = u
        .amplitudes()
        .iter()
        .zip(v.amplitudes())
        .map(|(x, y)| a * x + b * y)
        .collect();
    let combo = StateVector::from_amplitudes(6, combo).unwrap();
    let lhs = propagate(&action, &combo, 2.5, 1e-10).unwrap();
    let pu = propagate(&action, &u, 2.5, 1e-10).unwrap();
    let pv = propagate(&action, &v, 2.5, 1e-10).unwrap();
    for i in 0..64 {
        let rhs = a * pu.amplitudes()[i] + b * pv.amplitudes()[i];
        assert!((lhs.amplitudes()[i] - rhs).norm() < 1e-9);
    }
}

#[test]
fn energy_is_conserved_within_a_stage() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = sk_instance(9, 3, 0, false).unwrap();
    let diag = energies(&p, 24).unwrap();
    let gamma = 0.8;
    let action = HamiltonianAction::new(&diag, gamma).unwrap();
    let v = random_state(9, &mut rng);
    let energy = |s: &StateVector| {
        let hv = apply_h(&action, s).unwrap();
        s.amplitudes()
            .iter()
            .zip(hv.amplitudes())
            .map(|(a, b)| (a.conj() * b).re)
            .sum::<f64>()
    };
    let e0 = energy(&v);
    for t in [0.5, 1.0, 3.0, 7.0] {
        let w = propagate(&action, &v, t, 1e-10).unwrap();
        assert!((energy(&w) - e0).abs() < 1e-8, "t = {t}");
        // <H> = E_P - gamma E_G, so problem and graph energy trade off exactly
        let ep = w.diagonal_expectation(&diag) - v.diagonal_expectation(&diag);
        let eg = w.graph_energy() - v.graph_energy();
        assert!((ep - gamma * eg).abs() < 1e-8, "t = {t}");
    }
}

#[test]
fn single_qubit_rabi_oscillation() {
    // H = -gamma X on one qubit: |<1|psi(t)>|^2 = sin^2(gamma t)
    let diag = [0.0, 0.0];
    let gamma = 0.9;
    let action = HamiltonianAction::new(&diag, gamma).unwrap();
    let v = StateVector::basis(1, 0).unwrap();
    for t in [0.1, 0.7, 1.9, 4.0] {
        let w = propagate(&action, &v, t, 1e-10).unwrap();
        assert!((w.probability(1) - (gamma * t).sin().powi(2)).abs() < 1e-10);
    }
}

#[test]
fn eigensystem_is_orthonormal_and_reconstructs() {
    let p = sk_instance(6, 4, 1, false).unwrap();
    let diag = energies(&p, 24).unwrap();
    let h = dense_hamiltonian(&diag, 1.1);
    let sys = EigenSystem::of(&h);
    assert!(sys.orthonormality_error() < 1e-12);
    assert!(sys.reconstruction_error(&h) < 1e-11);
}

#[test]
fn nested_average_matches_naive_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..15 {
        let n = rng.random_range(2..=5);
        let m = rng.random_range(1..=3);
        let p = sk_instance(n, 5, case, false).unwrap();
        let gammas: Vec<f64> = (0..m).map(|_| rng.random_range(0.05..4.0)).collect();
        let nested = p_inf_nested(&p, &gammas).unwrap();
        let naive = p_inf_naive(&p, &gammas).unwrap();
        assert!((nested - naive).abs() < 1e-10, "case {case}");
        assert!((0.0..=1.0).contains(&nested));
    }
}

#[test]
fn grouped_mode_agrees_when_spectrum_is_simple() {
    let p = sk_instance(6, 6, 0, false).unwrap();
    let gammas = [2.0, 0.7];
    let a = p_inf_nested_with(&p, &gammas, DegeneracyMode::Ungrouped, 12).unwrap();
    let b = p_inf_nested_with(&p, &gammas, DegeneracyMode::Grouped, 12).unwrap();
    assert!(a.degenerate_stages.is_empty());
    assert!((a.value - b.value).abs() < 1e-10);
}

#[test]
fn infinite_time_average_matches_long_time_sampling() {
    let p = sk_instance(5, 7, 0, false).unwrap();
    let spectrum = brute_force_spectrum(&p).unwrap();
    let gammas = gamma_schedule(spectrum.spread(), 5, 2).unwrap();
    let exact = p_inf_nested(&p, &gammas).unwrap();
    let diag = energies(&p, 24).unwrap();
    let systems: Vec<EigenSystem> = gammas
        .iter()
        .map(|&g| EigenSystem::of(&dense_hamiltonian(&diag, g)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let samples = 3000;
    let probs: Vec<f64> = (0..samples)
        .map(|_| {
            let mut v = StateVector::uniform(5);
            for s in &systems {
                v = s.evolve(&v, rng.random_range(0.0..5e3)).unwrap();
            }
            spectrum
                .ground_indices
                .iter()
                .map(|&g| v.probability(g))
                .sum()
        })
        .collect();
    let mean = probs.iter().sum::<f64>() / samples as f64;
    let var = probs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (samples - 1) as f64;
    let se = (var / samples as f64).sqrt();
    assert!((exact - mean).abs() < 4.0 * se, "{exact} vs {mean} +- {se}");
}

#[test]
fn walker_runs_match_dense_stage_by_stage() {
    let p = sk_instance(7, 10, 0, false).unwrap();
    let schedule = build_schedule(&p, 4, SpreadMethod::Gumbel).unwrap();
    let out = Walker::new(&p).unwrap().run(&schedule.stages).unwrap();
    let mut v = StateVector::uniform(7);
    for Stage { gamma, time } in &schedule.stages {
        v = dense_evolve(&p, *gamma, *time, &v).unwrap();
    }
    assert!(out.state.max_deviation(&v) < 1e-5);
}

#[test]
fn graph_energy_quadratic_at_short_times() {
    let p = sk_instance(10, 11, 0, false).unwrap();
    let w = Walker::new(&p).unwrap();
    let trace = w.graph_energy_trace(1.0, 0.05, 5).unwrap();
    for pt in &trace {
        assert!(
            (pt.simulated - pt.quadratic).abs() / 10.0 < 1e-3,
            "t = {}",
            pt.t
        );
    }
}
