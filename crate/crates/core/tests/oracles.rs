//! Special functions and closed-form statistics against independent oracles.

use msqw::ising::{brute_force_spectrum, energies, sk_instance, IsingProblem};
use msqw::special::{bessel_j_sequence, erf, erf_inv, erfc, erfc_inv, normal_quantile};
use msqw::stats::{
    delta_sq, gumbel_parameters, moments, spread_erf_sk, spread_gumbel, spread_normal_fit,
};

/// Inverse of a monotone function by bisection.
fn bisect(f: impl Fn(f64) -> f64, target: f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `J_k(x) = (1/pi) int_0^pi cos(k tau - x sin tau) dtau` by the trapezoid
/// rule, which converges geometrically for this periodic integrand.
fn bessel_quadrature(k: usize, x: f64) -> f64 {
    let steps = 4000;
    let h = std::f64::consts::PI / steps as f64;
    let f = |tau: f64| (k as f64 * tau - x * tau.sin()).cos();
    let mut sum = 0.5 * (f(0.0) + f(std::f64::consts::PI));
    for i in 1..steps {
        sum += f(i as f64 * h);
    }
    sum * h / std::f64::consts::PI
}

/// `(x, erf(x), erfc(x))` computed with 40-digit arithmetic (mpmath).
const ERF_TABLE: &[(f64, f64, f64)] = &[
    (-4.5, -9.9999999980338395585e-1, 1.9999999998033839558),
    (-2.97, -9.9997333375127475611e-1, 1.9999733337512747561),
    (-1.3, -9.3400794494065244585e-1, 1.9340079449406524459),
    (-0.2, -2.2270258921047846618e-1, 1.2227025892104784662),
    (0.05, 5.6371977797016626955e-2, 9.4362802220298337304e-1),
    (0.5, 5.2049987781304653768e-1, 4.7950012218695346232e-1),
    (1.0, 8.4270079294971486934e-1, 1.5729920705028513066e-1),
    (1.5, 9.6610514647531072707e-1, 3.3894853524689272933e-2),
    (1.99, 9.9511141319961699705e-1, 4.8885868003830029527e-3),
    (2.0, 9.9532226501895273416e-1, 4.6777349810472658379e-3),
    (2.01, 9.9552484935524823708e-1, 4.4751506447517629202e-3),
    (2.5, 9.9959304798255504106e-1, 4.0695201744495893956e-4),
    (3.0, 9.9997790950300141456e-1, 2.2090496998585441373e-5),
    (3.5, 9.9999925690162765859e-1, 7.4309837234141274552e-7),
    (4.0, 9.9999998458274209972e-1, 1.5417257900280018852e-8),
    (5.0, 9.9999999999846254021e-1, 1.5374597944280348502e-12),
    (6.0, 9.9999999999999997848e-1, 2.1519736712498913117e-17),
    (8.0, 1.0, 1.122429717298292708e-29),
    (10.0, 1.0, 2.088487583762544757e-45),
];

#[test]
fn erf_matches_high_precision_table() {
    for &(x, e, c) in ERF_TABLE {
        assert!((erf(x) - e).abs() <= 8.0 * f64::EPSILON, "erf({x})");
        assert!(
            (erfc(x) - c).abs() <= 1e-14 * c + 4.0 * f64::EPSILON,
            "erfc({x}): {} vs {c}",
            erfc(x)
        );
    }
}

#[test]
fn erf_agrees_with_statrs() {
    // statrs itself is only accurate to ~1e-10
    for i in -600..=600 {
        let x = i as f64 / 100.0;
        assert!(
            (erf(x) - statrs::function::erf::erf(x)).abs() < 1e-9,
            "erf({x})"
        );
        let want = statrs::function::erf::erfc(x);
        assert!((erfc(x) - want).abs() <= 1e-9 * want, "erfc({x})");
    }
}

#[test]
fn erf_inv_inverts_by_bisection() {
    for &y in &[
        -0.999,
        -0.5,
        -0.1,
        0.0,
        0.3,
        0.5,
        0.9,
        0.99,
        31.0 / 32.0,
        1.0 - 2f64.powi(-20),
    ] {
        let oracle = bisect(erf, y, -7.0, 7.0);
        // erf is flat in the tail, so allow for the conditioning of the inverse
        let slope = std::f64::consts::FRAC_2_SQRT_PI * (-oracle * oracle).exp();
        let tol = 1e-13 + 4.0 * f64::EPSILON / slope;
        assert!((erf_inv(y) - oracle).abs() < tol, "erf_inv({y})");
    }
    let half = bisect(erf, 0.5, 0.0, 1.0);
    assert!((erf_inv(0.5) - half).abs() < 1e-14);
    assert!((erf_inv(0.5) - 0.4769).abs() < 1e-4);
}

#[test]
fn erfc_inv_deep_tail() {
    for k in [5, 10, 20, 40, 80] {
        let q = 2f64.powi(-k);
        let x = erfc_inv(q);
        assert!((erfc(x) - q).abs() < 1e-12 * q, "erfc_inv(2^-{k})");
    }
}

#[test]
fn normal_quantile_matches_statrs() {
    use statrs::distribution::{ContinuousCDF, Normal};
    let dist = Normal::new(0.0, 1.0).unwrap();
    for &p in &[
        1e-12,
        1e-6,
        0.01,
        0.2,
        0.5,
        0.8,
        0.99,
        1.0 - 1.0 / 1024.0,
        1.0 - 1e-9,
    ] {
        let want = dist.inverse_cdf(p);
        assert!(
            (normal_quantile(p) - want).abs() < 1e-9 * want.abs().max(1.0),
            "p = {p}"
        );
    }
}

#[test]
fn bessel_matches_quadrature() {
    for &x in &[0.1, 1.0, 5.5, 20.0, 73.0] {
        let seq = bessel_j_sequence(x, 100);
        for k in [0, 1, 2, 7, 30, 80, 100] {
            let want = bessel_quadrature(k, x);
            assert!(
                (seq[k] - want).abs() < 1e-12,
                "J_{k}({x}): {} vs {want}",
                seq[k]
            );
        }
    }
}

fn mixed(i: usize) -> IsingProblem {
    let n = 2 + i % 9;
    let p = sk_instance(n, 2024, i, i % 3 == 0).unwrap();
    if i % 2 == 0 {
        let c: Vec<_> = p.couplings().collect();
        IsingProblem::new(vec![0.0; n], &c).unwrap()
    } else {
        p
    }
}

#[test]
fn moments_match_enumeration() {
    for i in 0..60 {
        let p = mixed(i);
        let e = energies(&p, 24).unwrap();
        let m = moments(&p);
        let m2 = e.iter().map(|x| x * x).sum::<f64>() / e.len() as f64;
        for (k, &c) in (2..=5).zip(&m) {
            let brute = e.iter().map(|x| x.powi(k)).sum::<f64>() / e.len() as f64;
            let scale = brute.abs().max(m2.powf(k as f64 / 2.0) * 1e-8);
            assert!(
                (c - brute).abs() <= 1e-9 * scale,
                "instance {i}, moment {k}: {c} vs {brute}"
            );
        }
    }
}

#[test]
fn moments_of_small_cases() {
    let p = IsingProblem::new(vec![0.0, 0.0], &[(1, 0, 1.0)]).unwrap();
    let m = moments(&p);
    assert!((m[0] - 1.0).abs() < 1e-15);
    assert!(m[1].abs() < 1e-15);
    assert_eq!(moments(&IsingProblem::zeros(4).unwrap()), [0.0; 4]);
}

#[test]
fn delta_sq_matches_flip_enumeration() {
    for i in 0..40 {
        let p = mixed(i);
        let e = energies(&p, 24).unwrap();
        let n = p.n();
        let brute = (0..e.len())
            .map(|s| {
                (0..n)
                    .map(|q| (e[s ^ (1 << q)] - e[s]).powi(2))
                    .sum::<f64>()
            })
            .sum::<f64>()
            / e.len() as f64;
        assert!((delta_sq(&p) - brute).abs() <= 1e-9 * brute);
    }
}

#[test]
fn delta_sq_worked_cases() {
    let p = IsingProblem::new(vec![1.0, -0.5], &[(1, 0, 2.0)]).unwrap();
    assert_eq!(delta_sq(&p), 37.0);
    let e = energies(&p, 24).unwrap();
    let per_state: Vec<f64> = (0..4)
        .map(|s| (0..2).map(|q| (e[s ^ (1 << q)] - e[s]).powi(2)).sum())
        .collect();
    let mut sorted = per_state.clone();
    sorted.sort_by(f64::total_cmp);
    assert_eq!(sorted, vec![13.0, 29.0, 45.0, 61.0]);
    assert_eq!(delta_sq(&IsingProblem::zeros(3).unwrap()), 0.0);
    assert_eq!(delta_sq(&IsingProblem::new(vec![2.0], &[]).unwrap()), 16.0);
}

#[test]
fn delta_sq_mean_over_sk_instances() {
    // E[8 sum J^2 + 4 sum h^2] = 8 * n(n-1)/2 * 1/2 + 4n = 2n(n+1)
    let n = 10;
    let mean = (0..2000)
        .map(|i| delta_sq(&sk_instance(n, 17, i, false).unwrap()))
        .sum::<f64>()
        / 2000.0;
    let want = 2.0 * n as f64 * (n as f64 + 1.0);
    assert!((mean - want).abs() < 0.02 * want, "{mean} vs {want}");
}

#[test]
fn erf_spread_values() {
    let oracle = |n: usize| {
        let y = 1.0 - 2f64.powi(-(n as i32));
        0.887 * (2.0 * n as f64 * (n as f64 + 3.0)).sqrt() * bisect(erf, y, 0.0, 7.0)
    };
    let s5 = spread_erf_sk(5).unwrap().value;
    assert!((s5 - oracle(5)).abs() < 1e-10);
    assert!((s5 - 12.1).abs() < 0.05);
    let s1 = spread_erf_sk(1).unwrap().value;
    assert!((s1 - oracle(1)).abs() < 1e-12);
    assert!((s1 - 1.196).abs() < 1e-3);
}

/// A problem with `m2 = 1` and ten qubits: a single unit coupling.
fn unit_variance_ten() -> IsingProblem {
    IsingProblem::new(vec![0.0; 10], &[(1, 0, 1.0)]).unwrap()
}

#[test]
fn normal_fit_spread_value() {
    // 2 sqrt(2) erfinv(1 - 2^-10) with the inverse taken by bisection
    let want = 2.0 * 2f64.sqrt() * bisect(erf, 1.0 - 2f64.powi(-10), 0.0, 7.0);
    let got = spread_normal_fit(&unit_variance_ten()).unwrap().value;
    assert!((got - want).abs() < 1e-10);
    assert!((got - 6.594).abs() < 1e-3);
}

#[test]
fn gumbel_parameter_values() {
    let n_levels = 1024.0;
    let quantile = |p: f64| bisect(|x| 0.5 * erfc(-x / 2f64.sqrt()), p, -10.0, 10.0);
    let mu = quantile(1.0 - 1.0 / n_levels);
    let beta = quantile(1.0 - 1.0 / (n_levels * std::f64::consts::E)) - mu;
    let (m, b) = gumbel_parameters(1.0, n_levels);
    assert!((m - mu).abs() < 1e-10);
    assert!((b - beta).abs() < 1e-10);
    assert!((m - 3.0973).abs() < 1e-4);
    assert!((b - 0.28515).abs() < 1e-4);
    let spread = spread_gumbel(&unit_variance_ten()).unwrap().value;
    let euler = 0.577_215_664_901_532_9;
    assert!((spread - 2.0 * (mu + euler * beta)).abs() < 1e-10);
    assert!((spread - 6.5237).abs() < 1e-3);
}

#[test]
fn estimators_track_true_spread() {
    for n in [8usize, 10, 12] {
        let mut gumbel = Vec::new();
        let mut normal = Vec::new();
        for i in 0..100 {
            let p = sk_instance(n, 31, i, false).unwrap();
            let exact = brute_force_spectrum(&p).unwrap().spread();
            gumbel.push(spread_gumbel(&p).unwrap().value / exact);
            normal.push(spread_normal_fit(&p).unwrap().value / exact);
        }
        for ratios in [&mut gumbel, &mut normal] {
            ratios.sort_by(f64::total_cmp);
            let med = 0.5 * (ratios[49] + ratios[50]);
            assert!((0.8..=1.2).contains(&med), "n = {n}: median ratio {med}");
        }
    }
}
