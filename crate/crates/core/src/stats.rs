//! Closed-form statistics of the energy spectrum, computed from the fields
//! and couplings without enumerating states.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::{symmetry_expand, IsingProblem};
use crate::special::{erf_inv, normal_upper_quantile, EULER_MASCHERONI};

/// Central moments of the uniform distribution over all `2^n` energies
/// (the mean is always zero), plus the averaged flip sum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsSummary {
    pub m2: f64,
    pub m3: f64,
    pub m4: f64,
    pub m5: f64,
    /// Average over states of the sum of the `n` squared single-flip
    /// energy changes.
    pub delta_sq: f64,
}

impl StatsSummary {
    pub fn compute(p: &IsingProblem) -> Self {
        let [m2, m3, m4, m5] = moments(p);
        Self {
            m2,
            m3,
            m4,
            m5,
            delta_sq: delta_sq(p),
        }
    }

    /// `m4 / m2^2`; approaches 3 as the spectrum becomes Gaussian.
    pub fn kurtosis(&self) -> f64 {
        self.m4 / (self.m2 * self.m2)
    }

    pub fn skewness(&self) -> f64 {
        self.m3 / self.m2.powf(1.5)
    }
}

/// Symmetric zero-diagonal coupling matrix `S` with
/// `E = -sum_{i,j} S_ij s_i s_j` for a zero-field problem.
fn symmetric_couplings(p: &IsingProblem) -> DMatrix<f64> {
    let n = p.n();
    let mut s = DMatrix::zeros(n, n);
    for (i, j, v) in p.couplings() {
        s[(i, j)] = 0.5 * v;
        s[(j, i)] = 0.5 * v;
    }
    s
}

/// `[<H^2>, <H^3>, <H^4>, <H^5>]` from polynomial matrix identities.
///
/// Fields are first absorbed into an extra qubit; the spectrum is only
/// duplicated, so the moments are unchanged. The polynomial identities hold
/// for `+sum S_ij s_i s_j`; the odd moments flip sign for the energy
/// convention used here.
pub fn moments(p: &IsingProblem) -> [f64; 4] {
    let expanded;
    let zero_field = if p.has_zero_field() {
        p
    } else {
        expanded = symmetry_expand(p);
        &expanded
    };
    let s = symmetric_couplings(zero_field);
    let ss = s.component_mul(&s);
    let s2 = &s * &s;
    let s3 = &s2 * &s;
    let s4 = &s3 * &s;
    let s2s = s2.component_mul(&s);

    let sum_ss = ss.sum();
    let sum_s2s = s2s.sum();

    let m2 = 2.0 * sum_ss;
    let m3 = 8.0 * sum_s2s;
    let m4 = 48.0 * s3.component_mul(&s).sum()
        + 12.0 * sum_ss * sum_ss
        + 32.0 * ss.component_mul(&ss).sum()
        - 96.0 * (&ss * &ss).sum();
    let m5 = 384.0 * s4.component_mul(&s).sum() + 160.0 * sum_ss * sum_s2s
        - 1920.0 * (&s2s * &ss).sum()
        + 1280.0 * s2s.component_mul(&ss).sum();

    [m2, -m3, m4, -m5]
}

/// State-averaged sum of the `n` squared single-flip energy changes:
/// `8 sum_{i>j} J_ij^2 + 4 sum_i h_i^2`.
pub fn delta_sq(p: &IsingProblem) -> f64 {
    8.0 * p.packed_couplings().iter().map(|v| v * v).sum::<f64>()
        + 4.0 * p.fields().iter().map(|v| v * v).sum::<f64>()
}

/// How the spectral spread `E_max - E_min` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SpreadMethod {
    /// SK-specific closed form with the 0.887 tail factor.
    ErfHeuristic,
    /// Expected extreme of `Normal(0, <H^2>)` samples.
    NormalFit,
    /// Mean of the Gumbel law for the maximum of `Normal(0, <H^2>)` samples.
    #[default]
    Gumbel,
    /// Exhaustive enumeration. Exponential cost; for testing.
    Exact,
}

impl SpreadMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SpreadMethod::ErfHeuristic => "erf-heuristic",
            SpreadMethod::NormalFit => "normal-fit",
            SpreadMethod::Gumbel => "gumbel",
            SpreadMethod::Exact => "exact",
        }
    }
}

impl fmt::Display for SpreadMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for SpreadMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "erf-heuristic" | "erf" => Ok(SpreadMethod::ErfHeuristic),
            "normal-fit" | "normal" => Ok(SpreadMethod::NormalFit),
            "gumbel" => Ok(SpreadMethod::Gumbel),
            "exact" => Ok(SpreadMethod::Exact),
            other => Err(Error::parse(
                "spread method",
                format!("unknown method '{other}'"),
            )),
        }
    }
}

/// Estimated `E_max - E_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub value: f64,
    pub method: SpreadMethod,
}

/// `0.887 sqrt(2n(n+3)) erf^{-1}(1 - 1/N)` for SK instances of size `n`.
pub fn spread_erf_sk(n: usize) -> Result<SpreadEstimate> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let nf = n as f64;
    let value = 0.887 * (2.0 * nf * (nf + 3.0)).sqrt() * erf_inv(1.0 - (-nf).exp2());
    Ok(SpreadEstimate {
        value,
        method: SpreadMethod::ErfHeuristic,
    })
}

fn checked_variance(p: &IsingProblem) -> Result<f64> {
    let m2 = moments(p)[0];
    if m2 <= 0.0 {
        return Err(Error::InvalidParameter("energy variance is zero".into()));
    }
    Ok(m2)
}

/// Spread from a normal model of the spectrum: twice
/// `sigma sqrt(2) erf^{-1}(1 - 1/N)`.
pub fn spread_normal_fit(p: &IsingProblem) -> Result<SpreadEstimate> {
    let sigma = checked_variance(p)?.sqrt();
    let tail = (-(p.n() as f64)).exp2();
    Ok(SpreadEstimate {
        value: 2.0 * sigma * std::f64::consts::SQRT_2 * erf_inv(1.0 - tail),
        method: SpreadMethod::NormalFit,
    })
}

/// Location and scale of the Gumbel law for the maximum of `levels` draws
/// from `Normal(0, sigma^2)`.
pub fn gumbel_parameters(sigma: f64, levels: f64) -> (f64, f64) {
    let mu = sigma * normal_upper_quantile(1.0 / levels);
    let beta = sigma * normal_upper_quantile(1.0 / (levels * std::f64::consts::E)) - mu;
    (mu, beta)
}

/// Spread from the Gumbel extreme-value law: twice `mu + gamma_E beta`.
pub fn spread_gumbel(p: &IsingProblem) -> Result<SpreadEstimate> {
    if p.n() < 2 {
        return Err(Error::InvalidParameter(
            "Gumbel spread needs at least 2 qubits".into(),
        ));
    }
    let sigma = checked_variance(p)?.sqrt();
    let (mu, beta) = gumbel_parameters(sigma, p.dim() as f64);
    Ok(SpreadEstimate {
        value: 2.0 * (mu + EULER_MASCHERONI * beta),
        method: SpreadMethod::Gumbel,
    })
}

/// Dispatches on `method`. [`SpreadMethod::Exact`] enumerates the spectrum.
pub fn estimate_spread(p: &IsingProblem, method: SpreadMethod) -> Result<SpreadEstimate> {
    match method {
        SpreadMethod::ErfHeuristic => spread_erf_sk(p.n()),
        SpreadMethod::NormalFit => spread_normal_fit(p),
        SpreadMethod::Gumbel => spread_gumbel(p),
        SpreadMethod::Exact => {
            let s = crate::ising::brute_force_spectrum(p)?;
            Ok(SpreadEstimate {
                value: s.spread(),
                method,
            })
        }
    }
}
