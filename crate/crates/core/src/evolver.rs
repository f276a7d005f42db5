//! Matrix-free time evolution under `H_I - gamma H_G`.
//!
//! `H_I` is diagonal in the computational basis and `H_G = sum_j X_j` is the
//! adjacency matrix of the `n`-dimensional hypercube, so `H v` costs
//! `O(N n)` and no `N x N` matrix is ever formed. Propagation uses a
//! Chebyshev expansion of `exp(-i x t)` with Bessel coefficients, evaluated
//! by Clenshaw's recurrence.

use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ising::{energies, IsingProblem, SpectrumSummary, DEFAULT_QUBIT_CAP};
use crate::schedule::{Stage, WalkSchedule};
use crate::special::bessel_j_sequence;
use crate::stats::delta_sq;

/// Default absolute error of the propagator on the spectral interval.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Largest Chebyshev degree the propagator will use.
pub const DEFAULT_DEGREE_CAP: usize = 1 << 22;

/// Norm drift above which a walk renormalises its state.
pub const RENORMALIZE_THRESHOLD: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `2^n` complex amplitudes; bit `i` of the index is qubit `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1usize << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                got: amps.len(),
            });
        }
        Ok(Self { n, amps })
    }

    /// Uniform superposition, the ground state of `-H_G`.
    pub fn uniform(n: usize) -> Self {
        let dim = 1usize << n;
        let a = 1.0 / (dim as f64).sqrt();
        Self {
            n,
            amps: vec![Complex64::new(a, 0.0); dim],
        }
    }

    pub fn basis(n: usize, idx: usize) -> Result<Self> {
        let dim = 1usize << n;
        if idx >= dim {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
        let mut amps = vec![ZERO; dim];
        amps[idx] = Complex64::new(1.0, 0.0);
        Ok(Self { n, amps })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let inv = 1.0 / self.norm();
        self.amps.iter_mut().for_each(|a| *a *= inv);
    }

    pub fn probability(&self, idx: usize) -> f64 {
        self.amps[idx].norm_sqr()
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_deviation(&self, other: &StateVector) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `<psi| H_G |psi>`.
    pub fn graph_energy(&self) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.n {
            let bit = 1usize << j;
            for (x, a) in self.amps.iter().enumerate() {
                acc += (a.conj() * self.amps[x ^ bit]).re;
            }
        }
        acc
    }

    /// `<psi| diag |psi>` for a diagonal operator.
    pub fn diagonal_expectation(&self, diag: &[f64]) -> f64 {
        self.amps
            .iter()
            .zip(diag)
            .map(|(a, d)| a.norm_sqr() * d)
            .sum()
    }
}

/// `H = diag(E) - gamma H_G` applied without materialising a matrix.
#[derive(Debug, Clone, Copy)]
pub struct HamiltonianAction<'a> {
    diag: &'a [f64],
    gamma: f64,
    n: usize,
}

impl<'a> HamiltonianAction<'a> {
    pub fn new(diag: &'a [f64], gamma: f64) -> Result<Self> {
        let dim = diag.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "diagonal length {dim} is not a power of two"
            )));
        }
        Ok(Self {
            diag,
            gamma,
            n: dim.trailing_zeros() as usize,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn diag(&self) -> &'a [f64] {
        self.diag
    }

    /// `max |E| + |gamma| n`, an upper bound on the spectral radius.
    pub fn spectral_bound(&self) -> f64 {
        self.diag.iter().fold(0.0f64, |m, e| m.max(e.abs())) + self.gamma.abs() * self.n as f64
    }

    /// `out = scale * H v`.
    fn apply_scaled(&self, v: &[Complex64], out: &mut [Complex64], scale: f64) {
        let g = self.gamma * scale;
        for ((o, x), d) in out.iter_mut().zip(v).zip(self.diag) {
            *o = x * (d * scale);
        }
        for j in 0..self.n {
            let bit = 1usize << j;
            for base in (0..v.len()).step_by(bit << 1) {
                for x in base..base + bit {
                    let y = x | bit;
                    out[x] -= v[y] * g;
                    out[y] -= v[x] * g;
                }
            }
        }
    }

    /// `H v`.
    pub fn apply(&self, v: &StateVector) -> Result<StateVector> {
        self.check_dim(v)?;
        let mut out = vec![ZERO; v.dim()];
        self.apply_scaled(&v.amps, &mut out, 1.0);
        Ok(StateVector { n: v.n, amps: out })
    }

    fn check_dim(&self, v: &StateVector) -> Result<()> {
        if v.dim() != self.dim() {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            })
        } else {
            Ok(())
        }
    }
}

/// `H v` for `H = diag - gamma H_G`.
pub fn apply_h(action: &HamiltonianAction<'_>, v: &StateVector) -> Result<StateVector> {
    action.apply(v)
}

/// Chebyshev coefficients of `exp(-i R t y)` on `y in [-1, 1]`, truncated
/// once the remaining coefficient mass drops below `tol / 10`.
fn chebyshev_coefficients(rt: f64, tol: f64, degree_cap: usize) -> Result<Vec<Complex64>> {
    let mut margin = 30.0 + 8.0 * rt.cbrt();
    let bessel = loop {
        let kmax = (rt + margin).ceil() as usize;
        if kmax > degree_cap {
            return Err(Error::ToleranceUnreachable {
                needed: kmax,
                cap: degree_cap,
                tol,
            });
        }
        let j = bessel_j_sequence(rt, kmax);
        if 2.0 * j[kmax].abs() < tol * 1e-6 {
            break j;
        }
        margin *= 2.0;
    };

    // smallest K with 2 sum_{k > K} |J_k| <= tol / 10
    let mut tail = 0.0;
    let mut degree = bessel.len() - 1;
    for k in (1..bessel.len()).rev() {
        tail += 2.0 * bessel[k].abs();
        if tail > tol / 10.0 {
            break;
        }
        degree = k - 1;
    }
    if degree > degree_cap {
        return Err(Error::ToleranceUnreachable {
            needed: degree,
            cap: degree_cap,
            tol,
        });
    }

    // exp(-i z y) = J_0(z) + 2 sum_k (-i)^k J_k(z) T_k(y)
    const PHASES: [Complex64; 4] = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    Ok(bessel[..=degree]
        .iter()
        .enumerate()
        .map(|(k, &jk)| {
            let w = if k == 0 { jk } else { 2.0 * jk };
            PHASES[k % 4] * w
        })
        .collect())
}

/// `exp(-i H t) v` to absolute accuracy `tol` on the spectral interval.
pub fn propagate(
    action: &HamiltonianAction<'_>,
    v: &StateVector,
    t: f64,
    tol: f64,
) -> Result<StateVector> {
    propagate_with_cap(action, v, t, tol, DEFAULT_DEGREE_CAP)
}

/// [`propagate`] with an explicit polynomial degree cap.
pub fn propagate_with_cap(
    action: &HamiltonianAction<'_>,
    v: &StateVector,
    t: f64,
    tol: f64,
    degree_cap: usize,
) -> Result<StateVector> {
    action.check_dim(v)?;
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and >= 0, got {t}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let radius = action.spectral_bound();
    if t == 0.0 || radius == 0.0 {
        return Ok(v.clone());
    }
    if action.gamma == 0.0 {
        let amps = v
            .amps
            .iter()
            .zip(action.diag)
            .map(|(&a, &d)| a * Complex64::from_polar(1.0, -d * t))
            .collect();
        return Ok(StateVector { n: v.n, amps });
    }
    let coeffs = chebyshev_coefficients(radius * t, tol, degree_cap)?;
    let scale = 1.0 / radius;
    let dim = v.dim();
    let src = &v.amps;

    // Clenshaw: b_k = c_k v + 2 X b_{k+1} - b_{k+2};  f = c_0 v + X b_1 - b_2
    let mut b1 = vec![ZERO; dim];
    let mut b2 = vec![ZERO; dim];
    let mut xb = vec![ZERO; dim];
    for &c in coeffs[1..].iter().rev() {
        action.apply_scaled(&b1, &mut xb, scale);
        for ((b, &x), &s) in b2.iter_mut().zip(&xb).zip(src) {
            *b = c * s + 2.0 * x - *b;
        }
        std::mem::swap(&mut b1, &mut b2);
    }
    action.apply_scaled(&b1, &mut xb, scale);
    let c0 = coeffs[0];
    let amps = src
        .iter()
        .zip(&xb)
        .zip(&b2)
        .map(|((&s, &x), &b)| c0 * s + x - b)
        .collect();
    Ok(StateVector { n: v.n, amps })
}

/// Final state of a walk plus the largest norm drift seen between stages.
#[derive(Debug, Clone)]
pub struct WalkOutput {
    pub state: StateVector,
    pub max_norm_drift: f64,
    pub renormalized: bool,
}

/// Outcome of a Monte-Carlo short-time average.
#[derive(Debug, Clone, Serialize)]
pub struct RunResult {
    pub success_prob: f64,
    /// Standard error of the mean; zero for a single sample.
    pub stderr: f64,
    pub samples: usize,
    pub schedule_used: WalkSchedule,
    pub wall_time: f64,
    pub max_norm_drift: f64,
}

/// One point of a graph-energy trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TracePoint {
    pub t: f64,
    pub simulated: f64,
    /// `n - t^2 <Delta^2> / 2`
    pub quadratic: f64,
}

/// Reusable per-problem simulation context: the diagonal energies and the
/// ground manifold are computed once and shared by every stage and sample.
#[derive(Debug, Clone)]
pub struct Walker {
    n: usize,
    energies: Vec<f64>,
    spectrum: SpectrumSummary,
    delta_sq: f64,
    tol: f64,
}

impl Walker {
    pub fn new(p: &IsingProblem) -> Result<Self> {
        Self::with_cap(p, DEFAULT_QUBIT_CAP)
    }

    pub fn with_cap(p: &IsingProblem, cap: usize) -> Result<Self> {
        let energies = energies(p, cap)?;
        let spectrum = SpectrumSummary::from_energies(&energies);
        Ok(Self {
            n: p.n(),
            energies,
            spectrum,
            delta_sq: delta_sq(p),
            tol: DEFAULT_TOLERANCE,
        })
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn spectrum(&self) -> &SpectrumSummary {
        &self.spectrum
    }

    pub fn ground_indices(&self) -> &[usize] {
        &self.spectrum.ground_indices
    }

    pub fn action(&self, gamma: f64) -> HamiltonianAction<'_> {
        HamiltonianAction {
            diag: &self.energies,
            gamma,
            n: self.n,
        }
    }

    /// Evolves the uniform superposition through `stages` in order.
    pub fn run(&self, stages: &[Stage]) -> Result<WalkOutput> {
        let mut state = StateVector::uniform(self.n);
        let mut max_norm_drift: f64 = 0.0;
        let mut renormalized = false;
        for stage in stages {
            state = propagate(&self.action(stage.gamma), &state, stage.time, self.tol)?;
            let drift = (state.norm() - 1.0).abs();
            max_norm_drift = max_norm_drift.max(drift);
            if drift > RENORMALIZE_THRESHOLD {
                state.normalize();
                renormalized = true;
            }
        }
        Ok(WalkOutput {
            state,
            max_norm_drift,
            renormalized,
        })
    }

    /// Runs `schedule`, optionally with replacement stage times.
    pub fn run_schedule(
        &self,
        schedule: &WalkSchedule,
        times_override: Option<&[f64]>,
    ) -> Result<WalkOutput> {
        match times_override {
            None => self.run(&schedule.stages),
            Some(times) => {
                if times.len() != schedule.m() {
                    return Err(Error::DimensionMismatch {
                        expected: schedule.m(),
                        got: times.len(),
                    });
                }
                let stages: Vec<Stage> = schedule
                    .stages
                    .iter()
                    .zip(times)
                    .map(|(s, &time)| Stage {
                        gamma: s.gamma,
                        time,
                    })
                    .collect();
                self.run(&stages)
            }
        }
    }

    /// Ground-manifold population of `state`.
    pub fn success_probability(&self, state: &StateVector) -> Result<f64> {
        success_probability(&self.spectrum.ground_indices, state)
    }

    /// Averages the success probability over stage times drawn
    /// independently and uniformly from `[t_k, 2 t_k]`.
    ///
    /// Sample `i` draws from its own stream keyed by `(seed, i)`, so the
    /// result does not depend on how samples are scheduled across threads.
    pub fn mc_short_time_average(
        &self,
        schedule: &WalkSchedule,
        samples: usize,
        seed: u64,
    ) -> Result<RunResult> {
        if samples == 0 {
            return Err(Error::InvalidParameter("need at least one sample".into()));
        }
        let start = Instant::now();
        let outcomes: Vec<(f64, f64)> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let stages: Vec<Stage> = schedule
                    .stages
                    .iter()
                    .map(|s| Stage {
                        gamma: s.gamma,
                        time: s.time * (1.0 + rng.random::<f64>()),
                    })
                    .collect();
                let out = self.run(&stages)?;
                Ok((self.success_probability(&out.state)?, out.max_norm_drift))
            })
            .collect::<Result<_>>()?;

        let k = samples as f64;
        let mean = outcomes.iter().map(|o| o.0).sum::<f64>() / k;
        let stderr = if samples > 1 {
            let var = outcomes.iter().map(|o| (o.0 - mean).powi(2)).sum::<f64>() / (k - 1.0);
            (var / k).sqrt()
        } else {
            0.0
        };
        Ok(RunResult {
            success_prob: mean,
            stderr,
            samples,
            schedule_used: schedule.clone(),
            wall_time: start.elapsed().as_secs_f64(),
            max_norm_drift: outcomes.iter().map(|o| o.1).fold(0.0, f64::max),
        })
    }

    /// Graph energy along a single-stage walk at `steps + 1` evenly spaced
    /// times in `[0, t_max]`, next to its quadratic short-time prediction.
    pub fn graph_energy_trace(
        &self,
        gamma: f64,
        t_max: f64,
        steps: usize,
    ) -> Result<Vec<TracePoint>> {
        if steps == 0 || !(t_max >= 0.0) {
            return Err(Error::InvalidParameter(
                "need steps >= 1 and t_max >= 0".into(),
            ));
        }
        let action = self.action(gamma);
        let dt = t_max / steps as f64;
        let n = self.n as f64;
        let mut state = StateVector::uniform(self.n);
        let mut out = Vec::with_capacity(steps + 1);
        for i in 0..=steps {
            if i > 0 {
                state = propagate(&action, &state, dt, self.tol)?;
            }
            let t = i as f64 * dt;
            out.push(TracePoint {
                t,
                simulated: state.graph_energy(),
                quadratic: n - 0.5 * t * t * self.delta_sq,
            });
        }
        Ok(out)
    }
}

/// Total population on `ground` basis states.
pub fn success_probability(ground: &[usize], state: &StateVector) -> Result<f64> {
    if ground.is_empty() {
        return Err(Error::Empty("ground set"));
    }
    ground
        .iter()
        .map(|&g| {
            if g < state.dim() {
                Ok(state.probability(g))
            } else {
                Err(Error::IndexOutOfRange {
                    index: g,
                    n: state.n(),
                })
            }
        })
        .sum()
}

/// Evolves the uniform superposition of `p` through `schedule`.
pub fn run_msqw(
    p: &IsingProblem,
    schedule: &WalkSchedule,
    times_override: Option<&[f64]>,
) -> Result<WalkOutput> {
    Walker::new(p)?.run_schedule(schedule, times_override)
}

/// See [`Walker::mc_short_time_average`].
pub fn mc_short_time_average(
    p: &IsingProblem,
    schedule: &WalkSchedule,
    samples: usize,
    seed: u64,
) -> Result<RunResult> {
    Walker::new(p)?.mc_short_time_average(schedule, samples, seed)
}

/// See [`Walker::graph_energy_trace`].
pub fn graph_energy_trace(
    p: &IsingProblem,
    gamma: f64,
    t_max: f64,
    steps: usize,
) -> Result<Vec<TracePoint>> {
    Walker::new(p)?.graph_energy_trace(gamma, t_max, steps)
}

/// Writes `t,E_G_simulated,E_G_quadratic` rows.
pub fn write_trace_csv<W: std::io::Write>(trace: &[TracePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "E_G_simulated", "E_G_quadratic"])?;
    for p in trace {
        w.write_record([
            p.t.to_string(),
            p.simulated.to_string(),
            p.quadratic.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("trace csv", e))?;
    Ok(())
}
