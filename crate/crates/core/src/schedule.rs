//! Per-stage hopping rates and evolution times from closed-form heuristics.
//!
//! Stage `k` (1-based) evolves under `H_I - gamma_k H_G` with
//!
//! ```text
//! gamma_k = spread / (2n) * cot(k pi / (2(m + 1)))
//! ```
//!
//! and runs for the longer of the time needed for the driver to move the
//! state to a neighbouring basis state and the time needed for the problem
//! Hamiltonian to do the same.

use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ising::IsingProblem;
use crate::stats::{delta_sq, estimate_spread, SpreadMethod};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub gamma: f64,
    pub time: f64,
}

/// An `m`-stage walk schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkSchedule {
    pub stages: Vec<Stage>,
    pub n: usize,
    pub spread_used: f64,
    pub delta_sq_used: f64,
    pub spread_method: SpreadMethod,
}

impl WalkSchedule {
    /// Number of stages.
    pub fn m(&self) -> usize {
        self.stages.len()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.gamma).collect()
    }

    pub fn times(&self) -> Vec<f64> {
        self.stages.iter().map(|s| s.time).collect()
    }

    pub fn total_time(&self) -> f64 {
        self.stages.iter().map(|s| s.time).sum()
    }

    /// Replaces every hopping rate, keeping times.
    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.stages.iter_mut().for_each(|s| s.gamma = gamma);
        self
    }

    /// A schedule with explicit stages and no heuristic provenance.
    pub fn from_stages(n: usize, stages: Vec<Stage>) -> Self {
        Self {
            stages,
            n,
            spread_used: f64::NAN,
            delta_sq_used: f64::NAN,
            spread_method: SpreadMethod::Exact,
        }
    }

    /// Writes `k,gamma,time,delta_e` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let gammas = self.gammas();
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["k", "gamma", "time", "delta_e"])?;
        for (k, stage) in self.stages.iter().enumerate() {
            let de = delta_e(&gammas, self.n, k + 1)?;
            w.write_record([
                (k + 1).to_string(),
                stage.gamma.to_string(),
                stage.time.to_string(),
                de.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("schedule csv", e))?;
        Ok(())
    }
}

/// Hopping rates `gamma_1 > ... > gamma_m > 0`.
pub fn gamma_schedule(spread: f64, n: usize, m: usize) -> Result<Vec<f64>> {
    if !(spread > 0.0) || !spread.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "spread must be positive, got {spread}"
        )));
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidParameter("need m >= 1 and n >= 1".into()));
    }
    let scale = spread / (2.0 * n as f64);
    Ok((1..=m)
        .map(|k| scale / (k as f64 * PI / (2.0 * (m + 1) as f64)).tan())
        .collect())
}

#[inline]
fn saturation(gamma: f64) -> f64 {
    gamma / (1.0 + gamma * gamma).sqrt()
}

/// Expected change in graph energy during stage `stage` (1-based).
///
/// Uses `gamma_0 = inf` (term exactly 1) and `gamma_{m+1} = 0` (term
/// exactly 0) at the ends.
pub fn delta_e(gammas: &[f64], n: usize, stage: usize) -> Result<f64> {
    let m = gammas.len();
    if stage == 0 || stage > m {
        return Err(Error::IndexOutOfRange { index: stage, n: m });
    }
    let before = if stage == 1 {
        1.0
    } else {
        saturation(gammas[stage - 2])
    };
    let after = if stage == m {
        0.0
    } else {
        saturation(gammas[stage])
    };
    Ok(2.0 * n as f64 * (before - after))
}

/// Short-time branch: time for the driver to saturate `delta_e`.
pub fn driver_time(delta_e: f64, dsq: f64) -> f64 {
    (2.0 * delta_e / dsq).sqrt()
}

/// Final-stage branch: time for the problem Hamiltonian to move the state
/// across `delta_e` at hopping rate `gamma`.
pub fn problem_time(delta_e: f64, gamma: f64, n: usize, dsq: f64) -> f64 {
    (delta_e / (gamma * (2.0 * n as f64 / PI * dsq).sqrt())).sqrt()
}

/// Stage times `t_i = max(driver_time, problem_time)`.
pub fn stage_times(gammas: &[f64], n: usize, dsq: f64) -> Result<Vec<f64>> {
    if !(dsq > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "flip statistic must be positive, got {dsq}"
        )));
    }
    if gammas.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::InvalidParameter(
            "hopping rates must be positive".into(),
        ));
    }
    (1..=gammas.len())
        .map(|i| {
            let de = delta_e(gammas, n, i)?;
            Ok(driver_time(de, dsq).max(problem_time(de, gammas[i - 1], n, dsq)))
        })
        .collect()
}

/// Builds the full `m`-stage schedule for `p`.
pub fn build_schedule(p: &IsingProblem, m: usize, method: SpreadMethod) -> Result<WalkSchedule> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "stage count must be at least 1".into(),
        ));
    }
    let spread = estimate_spread(p, method)?.value;
    let dsq = delta_sq(p);
    let n = p.n();
    let gammas = gamma_schedule(spread, n, m)?;
    let times = stage_times(&gammas, n, dsq)?;
    Ok(WalkSchedule {
        stages: gammas
            .into_iter()
            .zip(times)
            .map(|(gamma, time)| Stage { gamma, time })
            .collect(),
        n,
        spread_used: spread,
        delta_sq_used: dsq,
        spread_method: method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ising::{brute_force_spectrum, sk_instance};

    #[test]
    fn single_stage_gamma() {
        let g = gamma_schedule(8.0, 2, 1).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_stage_gammas() {
        let g = gamma_schedule(12.0, 3, 2).unwrap();
        assert!((g[0] - 3f64.sqrt() * 2.0).abs() < 1e-14);
        assert!((g[1] - 2.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn twenty_stage_gammas_decrease() {
        let g = gamma_schedule(5.0, 7, 20).unwrap();
        assert_eq!(g.len(), 20);
        assert!(g.windows(2).all(|w| w[0] > w[1]));
        assert!(g.iter().all(|&v| v > 0.0));
        assert!(gamma_schedule(0.0, 7, 2).is_err());
        assert!(gamma_schedule(1.0, 7, 0).is_err());
    }

    #[test]
    fn single_stage_delta_e_is_full_range() {
        assert_eq!(delta_e(&[0.37], 5, 1).unwrap(), 10.0);
    }

    #[test]
    fn two_stage_delta_e_verbatim() {
        let s3 = 3f64.sqrt();
        let g = [s3, 1.0 / s3];
        let d1 = delta_e(&g, 2, 1).unwrap();
        let d2 = delta_e(&g, 2, 2).unwrap();
        assert!((d1 - 2.0).abs() < 1e-14);
        assert!((d2 - 2.0 * s3).abs() < 1e-14);
        assert!(delta_e(&g, 2, 0).is_err());
        assert!(delta_e(&g, 2, 3).is_err());
    }

    #[test]
    fn delta_e_sum_identity() {
        // sum_i dE_i = 2n (1 + f(gamma_1) - f(gamma_m)), f(x) = x / sqrt(1 + x^2)
        let g = gamma_schedule(17.0, 6, 9).unwrap();
        let total: f64 = (1..=9).map(|i| delta_e(&g, 6, i).unwrap()).sum();
        let f = |x: f64| x / (1.0 + x * x).sqrt();
        assert!((total - 12.0 * (1.0 + f(g[0]) - f(g[8]))).abs() < 1e-12);
        assert!((1..=9).all(|i| delta_e(&g, 6, i).unwrap() > 0.0));
    }

    #[test]
    fn driver_branch_worked_case() {
        let t = stage_times(&[1e9], 2, 37.0).unwrap();
        assert!((t[0] - (8.0f64 / 37.0).sqrt()).abs() < 1e-15);
        assert!((t[0] - 0.465).abs() < 1e-3);
        assert!(stage_times(&[1.0], 2, 0.0).is_err());
        assert!(stage_times(&[0.0], 2, 1.0).is_err());
    }

    #[test]
    fn single_stage_matches_direct_formulas() {
        let p = sk_instance(8, 2, 0, false).unwrap();
        let s = build_schedule(&p, 1, SpreadMethod::Gumbel).unwrap();
        let n = 8.0;
        let dsq = s.delta_sq_used;
        let gamma = s.stages[0].gamma;
        let ts = (4.0 * n / dsq).sqrt();
        let tf = (2.0 * n / (n * gamma * (2.0 / (n * PI) * dsq).sqrt())).sqrt();
        assert!((s.stages[0].time - ts.max(tf)).abs() < 1e-12);
    }

    #[test]
    fn doubling_problem_halves_driver_time() {
        let p = sk_instance(6, 1, 3, false).unwrap();
        let d1 = delta_sq(&p);
        let d2 = delta_sq(&p.scaled(2.0));
        assert!((d2 - 4.0 * d1).abs() < 1e-12 * d2);
        assert!((driver_time(12.0, d2) - 0.5 * driver_time(12.0, d1)).abs() < 1e-15);
    }

    #[test]
    fn exact_spread_option() {
        let p = sk_instance(9, 8, 0, false).unwrap();
        let s = build_schedule(&p, 3, SpreadMethod::Exact).unwrap();
        assert_eq!(s.spread_used, brute_force_spectrum(&p).unwrap().spread());
    }

    #[test]
    fn twenty_stage_schedule() {
        let p = sk_instance(10, 8, 0, false).unwrap();
        let s = build_schedule(&p, 20, SpreadMethod::Gumbel).unwrap();
        assert_eq!(s.m(), 20);
        assert!(s.stages.windows(2).all(|w| w[0].gamma > w[1].gamma));
        assert!(s
            .stages
            .iter()
            .all(|st| st.time.is_finite() && st.time > 0.0));
    }

    #[test]
    fn csv_export() {
        let s = WalkSchedule::from_stages(
            2,
            vec![
                Stage {
                    gamma: 1.0,
                    time: 0.5,
                },
                Stage {
                    gamma: 0.5,
                    time: 0.25,
                },
            ],
        );
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,gamma,time,delta_e\n1,1,0.5,"));
        assert_eq!(text.lines().count(), 3);
    }
}
