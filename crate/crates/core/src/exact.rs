//! Dense small-`n` oracles: eigendecomposition-based evolution and the
//! infinite-time average success probability.
//!
//! With independent stage times averaged over an unbounded range, every
//! cross term between distinct eigenvalues averages out and the success
//! probability becomes a chain of squared overlaps between consecutive
//! eigenbases. Propagating a population vector through that chain costs one
//! `N x N` product per stage, `O(m N^3)` overall.

use log::warn;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolver::StateVector;
use crate::ising::{energies, IsingProblem, SpectrumSummary};

/// Largest `n` for dense evolution.
pub const DENSE_EVOLVE_CAP: usize = 10;
/// Default largest `n` for the nested infinite-time average.
pub const P_INF_CAP: usize = 12;
/// Largest `n` for the naive multi-index sum.
pub const NAIVE_QUBIT_CAP: usize = 5;
/// Largest `m` for the naive multi-index sum.
pub const NAIVE_STAGE_CAP: usize = 3;

/// Relative eigenvalue separation below which levels count as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Dense `diag(E) - gamma H_G`.
pub fn dense_hamiltonian(diag: &[f64], gamma: f64) -> DMatrix<f64> {
    let dim = diag.len();
    let n = dim.trailing_zeros() as usize;
    let mut h = DMatrix::zeros(dim, dim);
    for x in 0..dim {
        h[(x, x)] = diag[x];
        for j in 0..n {
            h[(x, x ^ (1 << j))] = -gamma;
        }
    }
    h
}

/// Eigenvalues ascending, eigenvectors as matching orthonormal columns.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
}

impl EigenSystem {
    pub fn of(h: &DMatrix<f64>) -> Self {
        let eig = SymmetricEigen::new(h.clone());
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors =
            DMatrix::from_fn(h.nrows(), h.ncols(), |r, c| eig.eigenvectors[(r, order[c])]);
        Self { values, vectors }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `max |V^T V - I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let g = self.vectors.transpose() * &self.vectors;
        (g - DMatrix::identity(self.dim(), self.dim())).amax()
    }

    /// `max |V diag(values) V^T - h|`.
    pub fn reconstruction_error(&self, h: &DMatrix<f64>) -> f64 {
        let lam = DMatrix::from_diagonal(&DVector::from_column_slice(&self.values));
        (&self.vectors * lam * self.vectors.transpose() - h).amax()
    }

    /// `V exp(-i diag(values) t) V^T v`.
    pub fn evolve(&self, v: &StateVector, t: f64) -> Result<StateVector> {
        if v.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: v.dim(),
            });
        }
        let dim = self.dim();
        let amps = v.amplitudes();
        let mut coeff = vec![Complex64::new(0.0, 0.0); dim];
        for (a, c) in coeff.iter_mut().enumerate() {
            let col = self.vectors.column(a);
            let overlap: Complex64 = col.iter().zip(amps).map(|(&u, &x)| x * u).sum();
            *c = overlap * Complex64::from_polar(1.0, -self.values[a] * t);
        }
        let mut out = vec![Complex64::new(0.0, 0.0); dim];
        for (a, &c) in coeff.iter().enumerate() {
            for (o, &u) in out.iter_mut().zip(self.vectors.column(a).iter()) {
                *o += c * u;
            }
        }
        StateVector::from_amplitudes(v.n(), out)
    }

    /// Groups of consecutive eigenvalue indices closer than
    /// `DEGENERACY_TOLERANCE * scale`.
    pub fn degenerate_groups(&self, scale: f64) -> Vec<std::ops::Range<usize>> {
        let tol = DEGENERACY_TOLERANCE * scale.max(f64::MIN_POSITIVE);
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=self.dim() {
            if i == self.dim() || self.values[i] - self.values[i - 1] > tol {
                groups.push(start..i);
                start = i;
            }
        }
        groups
    }
}

/// Exact `exp(-i (H_I - gamma H_G) t) v` by dense diagonalisation.
pub fn dense_evolve(p: &IsingProblem, gamma: f64, t: f64, v: &StateVector) -> Result<StateVector> {
    let diag = energies(p, DENSE_EVOLVE_CAP)?;
    EigenSystem::of(&dense_hamiltonian(&diag, gamma)).evolve(v, t)
}

/// How near-degenerate stage spectra are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneracyMode {
    /// Treat every eigenvector separately, warning about degeneracies.
    #[default]
    Ungrouped,
    /// Project onto whole degenerate eigenspaces.
    Grouped,
}

#[derive(Debug, Clone, Serialize)]
pub struct PInfResult {
    pub value: f64,
    /// Stages whose spectrum had near-degenerate levels.
    pub degenerate_stages: Vec<usize>,
    pub grouped: bool,
}

fn stage_systems(
    p: &IsingProblem,
    gammas: &[f64],
    cap: usize,
) -> Result<(Vec<f64>, Vec<EigenSystem>)> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter("need at least one stage".into()));
    }
    let diag = energies(p, cap)?;
    let systems = gammas
        .iter()
        .map(|&g| EigenSystem::of(&dense_hamiltonian(&diag, g)))
        .collect();
    Ok((diag, systems))
}

fn spectral_scale(system: &EigenSystem) -> f64 {
    system.values[0]
        .abs()
        .max(system.values[system.dim() - 1].abs())
}

/// Infinite-time average success probability through the nested
/// population recursion.
pub fn p_inf_nested(p: &IsingProblem, gammas: &[f64]) -> Result<f64> {
    Ok(p_inf_nested_with(p, gammas, DegeneracyMode::Ungrouped, P_INF_CAP)?.value)
}

/// [`p_inf_nested`] with explicit degeneracy handling and qubit cap.
pub fn p_inf_nested_with(
    p: &IsingProblem,
    gammas: &[f64],
    mode: DegeneracyMode,
    cap: usize,
) -> Result<PInfResult> {
    let (diag, systems) = stage_systems(p, gammas, cap)?;
    let ground = SpectrumSummary::from_energies(&diag).ground_indices;
    let dim = diag.len();

    let degenerate_stages: Vec<usize> = systems
        .iter()
        .enumerate()
        .filter(|(_, s)| s.degenerate_groups(spectral_scale(s)).len() < s.dim())
        .map(|(k, _)| k + 1)
        .collect();
    if !degenerate_stages.is_empty() && mode == DegeneracyMode::Ungrouped {
        warn!(
            "near-degenerate stage spectra at stages {:?}; ungrouped infinite-time average",
            degenerate_stages
        );
    }

    let value = match mode {
        DegeneracyMode::Ungrouped => {
            let psi0 = DVector::from_element(dim, 1.0 / (dim as f64).sqrt());
            let first = systems[0].vectors.transpose() * psi0;
            let mut d = first.map(|x| x * x);
            for k in 1..systems.len() {
                let overlap = systems[k].vectors.transpose() * &systems[k - 1].vectors;
                d = overlap.map(|x| x * x) * d;
            }
            let last = &systems[systems.len() - 1].vectors;
            ground
                .iter()
                .map(|&g| {
                    last.row(g)
                        .iter()
                        .zip(d.iter())
                        .map(|(v, w)| v * v * w)
                        .sum::<f64>()
                })
                .sum()
        }
        DegeneracyMode::Grouped => {
            // Density matrix in the current eigenbasis, dephased between
            // distinct eigenspaces.
            let psi0 = DVector::from_element(dim, 1.0 / (dim as f64).sqrt());
            let c = systems[0].vectors.transpose() * psi0;
            let mut rho = &c * c.transpose();
            dephase(&mut rho, &systems[0]);
            for k in 1..systems.len() {
                let overlap = systems[k].vectors.transpose() * &systems[k - 1].vectors;
                rho = &overlap * rho * overlap.transpose();
                dephase(&mut rho, &systems[k]);
            }
            let last = &systems[systems.len() - 1].vectors;
            let rho_comp = last * rho * last.transpose();
            ground.iter().map(|&g| rho_comp[(g, g)]).sum()
        }
    };
    Ok(PInfResult {
        value,
        degenerate_stages,
        grouped: mode == DegeneracyMode::Grouped,
    })
}

fn dephase(rho: &mut DMatrix<f64>, system: &EigenSystem) {
    let groups = system.degenerate_groups(spectral_scale(system));
    let mut label = vec![0usize; system.dim()];
    for (gi, g) in groups.iter().enumerate() {
        for i in g.clone() {
            label[i] = gi;
        }
    }
    for r in 0..rho.nrows() {
        for c in 0..rho.ncols() {
            if label[r] != label[c] {
                rho[(r, c)] = 0.0;
            }
        }
    }
}

/// Direct multi-index evaluation of the infinite-time average. Cost grows
/// as `N^(m+1)`; only for cross-checking.
pub fn p_inf_naive(p: &IsingProblem, gammas: &[f64]) -> Result<f64> {
    if gammas.len() > NAIVE_STAGE_CAP {
        return Err(Error::InvalidParameter(format!(
            "naive sum supports at most {NAIVE_STAGE_CAP} stages"
        )));
    }
    let (diag, systems) = stage_systems(p, gammas, NAIVE_QUBIT_CAP)?;
    let ground = SpectrumSummary::from_energies(&diag).ground_indices;
    let dim = diag.len();
    let m = systems.len();
    let amp0 = 1.0 / (dim as f64).sqrt();

    // <E^(1)_a | psi_0>
    let first: Vec<f64> = (0..dim)
        .map(|a| systems[0].vectors.column(a).sum() * amp0)
        .collect();
    // <E^(k+1)_b | E^(k)_a>
    let overlaps: Vec<DMatrix<f64>> = (1..m)
        .map(|k| systems[k].vectors.transpose() * &systems[k - 1].vectors)
        .collect();
    let last = &systems[m - 1].vectors;

    let mut total = 0.0;
    let mut idx = vec![0usize; m];
    loop {
        let mut chain = first[idx[0]];
        for k in 1..m {
            chain *= overlaps[k - 1][(idx[k], idx[k - 1])];
        }
        for &g in &ground {
            let amp = last[(g, idx[m - 1])] * chain;
            total += amp * amp;
        }
        // odometer over (a_1, ..., a_m)
        let mut pos = 0;
        loop {
            if pos == m {
                return Ok(total);
            }
            idx[pos] += 1;
            if idx[pos] < dim {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::sk_instance;

    #[test]
    fn eigensystem_tolerances() {
        let p = sk_instance(6, 2, 0, false).unwrap();
        let h = dense_hamiltonian(&energies(&p, 10).unwrap(), 0.8);
        let sys = EigenSystem::of(&h);
        assert!(sys.values.windows(2).all(|w| w[0] <= w[1]));
        assert!(sys.orthonormality_error() <= 1e-10);
        assert!(sys.reconstruction_error(&h) <= 1e-8 * h.amax());
    }

    #[test]
    fn dense_zero_time_is_identity() {
        let p = sk_instance(4, 2, 1, false).unwrap();
        let v = StateVector::uniform(4);
        let out = dense_evolve(&p, 0.5, 0.0, &v).unwrap();
        assert!(out.max_deviation(&v) < 1e-12);
    }

    #[test]
    fn eigenvector_only_picks_up_phase() {
        let p = sk_instance(4, 2, 2, false).unwrap();
        let h = dense_hamiltonian(&energies(&p, 10).unwrap(), 0.7);
        let sys = EigenSystem::of(&h);
        let col: Vec<Complex64> = sys
            .vectors
            .column(3)
            .iter()
            .map(|&x| Complex64::new(x, 0.0))
            .collect();
        let v = StateVector::from_amplitudes(4, col).unwrap();
        let out = sys.evolve(&v, 2.3).unwrap();
        let phase = Complex64::from_polar(1.0, -sys.values[3] * 2.3);
        for (a, b) in out.amplitudes().iter().zip(v.amplitudes()) {
            assert!((a - b * phase).norm() < 1e-12);
            assert!((a.norm() - b.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_evolve_cap() {
        let p = sk_instance(11, 0, 0, false).unwrap();
        assert!(dense_evolve(&p, 1.0, 1.0, &StateVector::uniform(11)).is_err());
    }

    #[test]
    fn zero_gamma_single_stage_is_ground_fraction() {
        let p = sk_instance(5, 3, 1, false).unwrap();
        let g = SpectrumSummary::from_energies(&energies(&p, 10).unwrap())
            .ground_indices
            .len();
        let v = p_inf_nested(&p, &[0.0]).unwrap();
        assert!((v - g as f64 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn nested_matches_naive() {
        for (n, m, seed) in [(3, 1, 0), (4, 2, 1), (5, 3, 2)] {
            let p = sk_instance(n, seed, 0, false).unwrap();
            let gammas: Vec<f64> = (0..m).map(|k| 2.0 / (k + 1) as f64).collect();
            let a = p_inf_nested(&p, &gammas).unwrap();
            let b = p_inf_naive(&p, &gammas).unwrap();
            assert!((a - b).abs() < 1e-10, "n={n} m={m}: {a} vs {b}");
            assert!((0.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn grouped_equals_ungrouped_without_degeneracy() {
        let p = sk_instance(5, 9, 0, false).unwrap();
        let g = [1.7, 0.6];
        let a = p_inf_nested_with(&p, &g, DegeneracyMode::Ungrouped, 10).unwrap();
        let b = p_inf_nested_with(&p, &g, DegeneracyMode::Grouped, 10).unwrap();
        assert!(a.degenerate_stages.is_empty());
        assert!((a.value - b.value).abs() < 1e-10);
    }

    #[test]
    fn grouped_handles_symmetric_problem() {
        // zero fields: every level is at least doubly degenerate at gamma = 0
        let p = IsingProblem::new(vec![0.0; 3], &[(1, 0, 1.0), (2, 0, -0.4), (2, 1, 0.3)]).unwrap();
        let r = p_inf_nested_with(&p, &[0.0], DegeneracyMode::Grouped, 10).unwrap();
        assert_eq!(r.degenerate_stages, vec![1]);
        assert!((r.value - 2.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn naive_caps() {
        let p = sk_instance(6, 0, 0, false).unwrap();
        assert!(p_inf_naive(&p, &[1.0]).is_err());
        let p = sk_instance(3, 0, 0, false).unwrap();
        assert!(p_inf_naive(&p, &[1.0; 4]).is_err());
    }
}
