//! Ising problem representation, SK instance generation and the exhaustive
//! spectrum oracle.
//!
//! Energies follow
//!
//! ```text
//! E(s) = -sum_i h_i s_i - sum_{i > j} J[i][j] s_i s_j
//! ```
//!
//! over `n` spins. A basis index `idx` encodes the spins bit by bit: bit `i`
//! of `idx` belongs to qubit `i` and maps to `s_i = 1 - 2 * bit`, so index 0
//! is the all-spins-up configuration.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest qubit count for anything that allocates `2^n` storage.
pub const DEFAULT_QUBIT_CAP: usize = 24;

/// Spin value (+1 or -1) of `qubit` in basis state `idx`.
#[inline]
pub fn spin(idx: usize, qubit: usize) -> f64 {
    1.0 - 2.0 * ((idx >> qubit) & 1) as f64
}

#[inline]
fn tri_index(i: usize, j: usize) -> usize {
    debug_assert!(j < i);
    i * (i - 1) / 2 + j
}

/// An Ising instance with fields `h` and strictly-lower-triangular couplings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "crate::dataset::ProblemDocument",
    into = "crate::dataset::ProblemDocument"
)]
pub struct IsingProblem {
    label: String,
    h: Vec<f64>,
    /// Packed row-major lower triangle: entry (i, j) with j < i lives at
    /// `i * (i - 1) / 2 + j`.
    j: Vec<f64>,
}

impl IsingProblem {
    /// A problem with all fields and couplings zero.
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "qubit count must be at least 1".into(),
            ));
        }
        Ok(Self {
            label: String::new(),
            h: vec![0.0; n],
            j: vec![0.0; n * (n - 1) / 2],
        })
    }

    /// Builds a problem from fields and a list of `(i, j, value)` couplings.
    /// Either index order is accepted; the pair is stored at `(max, min)`.
    /// Repeated pairs accumulate.
    pub fn new(h: Vec<f64>, couplings: &[(usize, usize, f64)]) -> Result<Self> {
        let mut p = Self::zeros(h.len())?;
        p.h = h;
        for &(a, b, v) in couplings {
            let (i, j) = if a > b { (a, b) } else { (b, a) };
            if i == j || i >= p.n() {
                return Err(Error::InvalidParameter(format!(
                    "coupling ({a}, {b}) is not an off-diagonal pair for {} qubits",
                    p.n()
                )));
            }
            p.j[tri_index(i, j)] += v;
        }
        p.validate()?;
        Ok(p)
    }

    /// Builds a problem from fields and a dense matrix whose strict lower
    /// triangle holds the couplings. Diagonal and upper entries are ignored.
    pub fn from_lower(h: Vec<f64>, lower: &[Vec<f64>]) -> Result<Self> {
        let n = h.len();
        if lower.len() != n || lower.iter().any(|row| row.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: lower.len(),
            });
        }
        let mut p = Self::zeros(n)?;
        p.h = h;
        for i in 1..n {
            for j in 0..i {
                p.j[tri_index(i, j)] = lower[i][j];
            }
        }
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn from_packed(label: String, h: Vec<f64>, j: Vec<f64>) -> Result<Self> {
        let n = h.len();
        if n == 0 {
            return Err(Error::InvalidParameter(
                "qubit count must be at least 1".into(),
            ));
        }
        if j.len() != n * (n - 1) / 2 {
            return Err(Error::DimensionMismatch {
                expected: n * (n - 1) / 2,
                got: j.len(),
            });
        }
        let p = Self { label, h, j };
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<()> {
        if self.h.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("fields"));
        }
        if self.j.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("couplings"));
        }
        Ok(())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Number of qubits.
    pub fn n(&self) -> usize {
        self.h.len()
    }

    /// Hilbert space dimension `2^n`.
    pub fn dim(&self) -> usize {
        1usize << self.n()
    }

    pub fn fields(&self) -> &[f64] {
        &self.h
    }

    /// Packed strict lower triangle, row-major.
    pub fn packed_couplings(&self) -> &[f64] {
        &self.j
    }

    /// Coupling between qubits `a` and `b` regardless of order; zero on the
    /// diagonal.
    pub fn coupling(&self, a: usize, b: usize) -> f64 {
        match a.cmp(&b) {
            std::cmp::Ordering::Greater => self.j[tri_index(a, b)],
            std::cmp::Ordering::Less => self.j[tri_index(b, a)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Iterates `(i, j, J[i][j])` over the strict lower triangle.
    pub fn couplings(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (1..self.n()).flat_map(move |i| (0..i).map(move |j| (i, j, self.j[tri_index(i, j)])))
    }

    pub fn has_zero_field(&self) -> bool {
        self.h.iter().all(|&v| v == 0.0)
    }

    /// Multiplies every field and coupling by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            label: self.label.clone(),
            h: self.h.iter().map(|v| v * factor).collect(),
            j: self.j.iter().map(|v| v * factor).collect(),
        }
    }

    /// Multiplies the couplings only.
    pub fn scale_couplings(&mut self, factor: f64) {
        self.j.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn check_cap(&self, cap: usize) -> Result<()> {
        if self.n() > cap {
            Err(Error::QubitCapExceeded { n: self.n(), cap })
        } else {
            Ok(())
        }
    }

    /// Energy of a single basis state.
    pub fn energy_of_state(&self, idx: usize) -> Result<f64> {
        let n = self.n();
        if n >= usize::BITS as usize || idx >= (1usize << n) {
            return Err(Error::IndexOutOfRange { index: idx, n });
        }
        Ok(self.energy_unchecked(idx))
    }

    fn energy_unchecked(&self, idx: usize) -> f64 {
        let n = self.n();
        let mut e = 0.0;
        for i in 0..n {
            let si = spin(idx, i);
            e -= self.h[i] * si;
            let row = &self.j[tri_index_row(i)..tri_index_row(i) + i];
            let mut acc = 0.0;
            for (j, &c) in row.iter().enumerate() {
                acc += c * spin(idx, j);
            }
            e -= si * acc;
        }
        e
    }

    /// Local fields `h_b + sum_j J_bj s_j` for every qubit in state `idx`.
    fn local_fields(&self, idx: usize) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|b| {
                self.h[b]
                    + (0..n)
                        .filter(|&j| j != b)
                        .map(|j| self.coupling(b, j) * spin(idx, j))
                        .sum::<f64>()
            })
            .collect()
    }

    /// Energy change from flipping `qubit` in state `idx`.
    pub fn flip_delta(&self, idx: usize, qubit: usize) -> f64 {
        2.0 * spin(idx, qubit) * self.local_fields(idx)[qubit]
    }
}

#[inline]
fn tri_index_row(i: usize) -> usize {
    if i == 0 {
        0
    } else {
        i * (i - 1) / 2
    }
}

/// Steps between exact resynchronisations of the Gray-code walk.
const RESYNC_INTERVAL: usize = 1 << 10;

/// All `2^n` energies, indexed by basis state.
///
/// Walks the reflected Gray code so consecutive states differ by one spin
/// and each step costs `O(n)` through a running local-field vector. Energy
/// and fields are recomputed exactly every 1024 steps to bound rounding
/// drift.
pub fn energies(p: &IsingProblem, cap: usize) -> Result<Vec<f64>> {
    p.check_cap(cap)?;
    let n = p.n();
    let dim = p.dim();
    let mut out = vec![0.0; dim];

    let mut idx = 0usize;
    let mut e = p.energy_unchecked(0);
    let mut fields = p.local_fields(0);
    out[0] = e;

    for step in 1..dim {
        let q = step.trailing_zeros() as usize;
        let s_old = spin(idx, q);
        e += 2.0 * s_old * fields[q];
        idx ^= 1 << q;
        for (j, f) in fields.iter_mut().enumerate() {
            if j != q {
                *f -= 2.0 * p.coupling(j, q) * s_old;
            }
        }
        if step % RESYNC_INTERVAL == 0 {
            e = p.energy_unchecked(idx);
            fields = p.local_fields(idx);
        }
        out[idx] = e;
    }
    debug_assert!(n < usize::BITS as usize);
    Ok(out)
}

/// Exact spectrum summary from full enumeration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSummary {
    /// Every energy by basis index, when retained.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub energies: Option<Vec<f64>>,
    pub e_min: f64,
    pub e_max: f64,
    /// Basis indices within the tie tolerance of `e_min`, ascending.
    pub ground_indices: Vec<usize>,
    /// Distance from `e_min` to the next distinct level; zero when the
    /// spectrum is flat.
    pub min_gap: f64,
}

impl SpectrumSummary {
    /// Tie tolerance used to group degenerate ground states.
    pub fn tie_tolerance(e_min: f64) -> f64 {
        1e-12 * e_min.abs().max(1.0)
    }

    /// Summarises an energy table without retaining it.
    pub fn from_energies(energies: &[f64]) -> Self {
        let (e_min, e_max) = energies
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &e| {
                (lo.min(e), hi.max(e))
            });
        let tol = Self::tie_tolerance(e_min);
        let mut ground_indices = Vec::new();
        let mut next = f64::INFINITY;
        for (i, &e) in energies.iter().enumerate() {
            if e - e_min <= tol {
                ground_indices.push(i);
            } else if e < next {
                next = e;
            }
        }
        let min_gap = if next.is_finite() { next - e_min } else { 0.0 };
        Self {
            energies: None,
            e_min,
            e_max,
            ground_indices,
            min_gap,
        }
    }

    pub fn spread(&self) -> f64 {
        self.e_max - self.e_min
    }
}

/// Enumerates the full spectrum and summarises it.
pub fn brute_force_spectrum(p: &IsingProblem) -> Result<SpectrumSummary> {
    brute_force_spectrum_with(p, DEFAULT_QUBIT_CAP, false)
}

/// Like [`brute_force_spectrum`] with an explicit cap, optionally keeping the
/// energy table.
pub fn brute_force_spectrum_with(
    p: &IsingProblem,
    cap: usize,
    retain_energies: bool,
) -> Result<SpectrumSummary> {
    let table = energies(p, cap)?;
    let mut summary = SpectrumSummary::from_energies(&table);
    if retain_energies {
        summary.energies = Some(table);
    }
    Ok(summary)
}

/// Generates one SK instance.
///
/// Couplings are drawn from `Normal(0, 1/2)` and fields from `Normal(0, 1)`.
/// With `scale_sqrt2` the couplings are multiplied by `sqrt(2)` afterwards.
/// The random stream depends only on `(seed, n, index)`.
pub fn sk_instance(n: usize, seed: u64, index: usize, scale_sqrt2: bool) -> Result<IsingProblem> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "SK instances need n >= 2, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((n as u64) << 40) ^ index as u64);

    let field = Normal::new(0.0, 1.0).expect("valid normal");
    let coupling = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid normal");

    let h: Vec<f64> = (0..n).map(|_| field.sample(&mut rng)).collect();
    let mut j: Vec<f64> = (0..n * (n - 1) / 2)
        .map(|_| coupling.sample(&mut rng))
        .collect();
    if scale_sqrt2 {
        j.iter_mut().for_each(|v| *v *= std::f64::consts::SQRT_2);
    }
    // Cheap unique-ish tag so labels of different seeds rarely collide.
    let tag: u32 = rng.random();
    IsingProblem::from_packed(format!("sk{n}-s{seed}-{index:05}-{tag:08x}"), h, j)
}

/// Generates `count` SK instances deterministically from `seed`.
pub fn sk_generate(
    n: usize,
    seed: u64,
    count: usize,
    scale_sqrt2: bool,
) -> Result<Vec<IsingProblem>> {
    (0..count)
        .map(|i| sk_instance(n, seed, i, scale_sqrt2))
        .collect()
}

/// Fixes the last spin up, removing the global spin-flip symmetry of a
/// zero-field problem.
pub fn symmetry_reduce(p: &IsingProblem) -> Result<IsingProblem> {
    if !p.has_zero_field() {
        return Err(Error::NonZeroField);
    }
    let n = p.n();
    if n < 2 {
        return Err(Error::InvalidParameter(
            "cannot reduce a single-qubit problem".into(),
        ));
    }
    let last = n - 1;
    let h = (0..last).map(|i| p.coupling(last, i)).collect();
    let j = p.j[..tri_index_row(last)].to_vec();
    IsingProblem::from_packed(p.label.clone(), h, j)
}

/// Absorbs the fields into couplings to an extra qubit, giving a zero-field
/// problem on `n + 1` qubits.
pub fn symmetry_expand(p: &IsingProblem) -> IsingProblem {
    let mut j = p.j.clone();
    j.extend_from_slice(&p.h);
    IsingProblem {
        label: p.label.clone(),
        h: vec![0.0; p.n() + 1],
        j,
    }
}
