//! Batch experiments: parameter sweeps, median statistics with bootstrap
//! errors, log-linear scaling fits and small-gap instance curation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;
use std::time::Instant;

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolver::Walker;
use crate::exact::{p_inf_nested_with, DegeneracyMode, P_INF_CAP};
use crate::ising::{brute_force_spectrum_with, sk_instance, IsingProblem, DEFAULT_QUBIT_CAP};
use crate::schedule::build_schedule;
use crate::stats::SpreadMethod;

/// Leading comment line of every sweep CSV.
pub const SWEEP_SCHEMA: &str = "# msqw-sweep v1";

/// Minimum acceptance rate before curation gives up.
pub const MIN_ACCEPTANCE_RATE: f64 = 1e-5;

/// How success probabilities are evaluated.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, Default,
)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Monte-Carlo average over stage times in `[t_k, 2 t_k]`.
    #[default]
    ShortTimeMc,
    /// Infinite-time average by dense diagonalisation.
    InfiniteTime,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::ShortTimeMc => "short-time-mc",
            Mode::InfiniteTime => "infinite-time",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "short-time-mc" | "short" | "mc" => Ok(Mode::ShortTimeMc),
            "infinite-time" | "infinite" | "inf" => Ok(Mode::InfiniteTime),
            other => Err(Error::parse("mode", format!("unknown mode '{other}'"))),
        }
    }
}

/// Everything that determines a sweep's output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub stages: Vec<usize>,
    pub instances: usize,
    pub seed: u64,
    pub spread_method: SpreadMethod,
    pub samples: usize,
    pub mode: Mode,
    /// Replaces every heuristic hopping rate.
    pub gamma: Option<f64>,
    /// Restrict to curated instances with minimum gap at most this value.
    pub hard_gap: Option<f64>,
    pub scale_sqrt2: bool,
    pub cap: usize,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n_min: 5,
            n_max: 10,
            stages: vec![1],
            instances: 20,
            seed: 0,
            spread_method: SpreadMethod::Gumbel,
            samples: 20,
            mode: Mode::ShortTimeMc,
            gamma: None,
            hard_gap: None,
            scale_sqrt2: false,
            cap: DEFAULT_QUBIT_CAP,
            workers: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::parse(format!("config key '{key}'"), e))
}

impl SweepConfig {
    /// Applies one `key = value` setting. Keys use dashes; underscores are
    /// accepted too.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key.trim().replace('_', "-").as_str() {
            "n-min" => self.n_min = parse_value(key, value)?,
            "n-max" => self.n_max = parse_value(key, value)?,
            "n" => {
                let v = parse_value(key, value)?;
                self.n_min = v;
                self.n_max = v;
            }
            "stages" => {
                self.stages = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_value(key, s.trim()))
                    .collect::<Result<_>>()?
            }
            "instances" => self.instances = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "spread-method" => self.spread_method = value.parse()?,
            "samples" => self.samples = parse_value(key, value)?,
            "mode" => self.mode = value.parse()?,
            "gamma" => self.gamma = Some(parse_value(key, value)?),
            "hard-gap" => self.hard_gap = Some(parse_value(key, value)?),
            "scale-sqrt2" => self.scale_sqrt2 = parse_value(key, value)?,
            "cap" => self.cap = parse_value(key, value)?,
            "workers" => self.workers = Some(parse_value(key, value)?),
            other => return Err(Error::parse("config", format!("unknown key '{other}'"))),
        }
        Ok(())
    }

    /// Parses flat `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::parse(
                    "config",
                    format!("line {}: expected key = value", lineno + 1),
                )
            })?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_min < 2 || self.n_max < self.n_min {
            return Err(Error::InvalidParameter(format!(
                "bad qubit range {}..={}",
                self.n_min, self.n_max
            )));
        }
        if self.stages.is_empty() || self.stages.contains(&0) {
            return Err(Error::InvalidParameter("stage counts must be >= 1".into()));
        }
        if self.samples == 0 {
            return Err(Error::InvalidParameter("samples must be >= 1".into()));
        }
        let cap = match self.mode {
            Mode::ShortTimeMc => self.cap,
            Mode::InfiniteTime => self.cap.min(P_INF_CAP),
        };
        if self.n_max > cap {
            return Err(Error::QubitCapExceeded { n: self.n_max, cap });
        }
        Ok(())
    }
}

/// One evaluated `(instance, m)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub n: usize,
    pub m: usize,
    pub label: String,
    pub mode: Mode,
    pub spread_method: SpreadMethod,
    pub success_prob: f64,
    pub stderr: f64,
    pub gamma1: f64,
    pub t1: f64,
    #[serde(skip)]
    pub wall_time: f64,
}

impl SweepRecord {
    fn key(&self) -> (String, usize, Mode) {
        (self.label.clone(), self.m, self.mode)
    }
}

/// splitmix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the Monte-Carlo stream of one sweep point.
pub fn point_seed(seed: u64, n: usize, index: usize, m: usize) -> u64 {
    mix(mix(mix(seed ^ n as u64) ^ index as u64) ^ m as u64)
}

fn instances_for(cfg: &SweepConfig, n: usize) -> Result<Vec<IsingProblem>> {
    match cfg.hard_gap {
        None => (0..cfg.instances)
            .map(|i| sk_instance(n, cfg.seed, i, cfg.scale_sqrt2))
            .collect(),
        Some(gap) => Ok(curate_hard(n, cfg.instances, gap, cfg.seed, cfg.scale_sqrt2)?.problems),
    }
}

fn evaluate(
    cfg: &SweepConfig,
    n: usize,
    index: usize,
    p: &IsingProblem,
    walker: Option<&Walker>,
    m: usize,
) -> Result<SweepRecord> {
    let start = Instant::now();
    let mut schedule = build_schedule(p, m, cfg.spread_method)?;
    if let Some(g) = cfg.gamma {
        schedule = schedule.with_gamma(g);
    }
    let (success_prob, stderr) = match cfg.mode {
        Mode::ShortTimeMc => {
            let walker = walker.expect("walker prepared for short-time mode");
            let r = walker.mc_short_time_average(
                &schedule,
                cfg.samples,
                point_seed(cfg.seed, n, index, m),
            )?;
            (r.success_prob, r.stderr)
        }
        Mode::InfiniteTime => {
            let r = p_inf_nested_with(
                p,
                &schedule.gammas(),
                DegeneracyMode::Ungrouped,
                cfg.cap.min(P_INF_CAP),
            )?;
            (r.value, 0.0)
        }
    };
    Ok(SweepRecord {
        n,
        m,
        label: p.label().to_string(),
        mode: cfg.mode,
        spread_method: cfg.spread_method,
        success_prob,
        stderr,
        gamma1: schedule.stages[0].gamma,
        t1: schedule.stages[0].time,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// Sorts by `(n, label, m)`, the canonical output order.
pub fn sort_records(records: &mut [SweepRecord]) {
    records.sort_by(|a, b| (a.n, &a.label, a.m, a.mode).cmp(&(b.n, &b.label, b.m, b.mode)));
}

/// Runs every `(n, instance, m)` point of `cfg` not already in `existing`
/// and returns the union, sorted.
pub fn sweep(cfg: &SweepConfig, existing: &[SweepRecord]) -> Result<Vec<SweepRecord>> {
    cfg.validate()?;
    let run = || -> Result<Vec<SweepRecord>> {
        let done: HashSet<(String, usize, Mode)> = existing.iter().map(SweepRecord::key).collect();
        let mut out = existing.to_vec();
        for n in cfg.n_min..=cfg.n_max {
            let problems = instances_for(cfg, n)?;
            let fresh: Vec<SweepRecord> = problems
                .par_iter()
                .enumerate()
                .map(|(index, p)| {
                    let pending: Vec<usize> = cfg
                        .stages
                        .iter()
                        .copied()
                        .filter(|&m| !done.contains(&(p.label().to_string(), m, cfg.mode)))
                        .collect();
                    if pending.is_empty() {
                        return Ok(Vec::new());
                    }
                    let walker = match cfg.mode {
                        Mode::ShortTimeMc => Some(Walker::with_cap(p, cfg.cap)?),
                        Mode::InfiniteTime => None,
                    };
                    pending
                        .into_iter()
                        .map(|m| evaluate(cfg, n, index, p, walker.as_ref(), m))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .flatten()
                .collect();
            out.extend(fresh);
        }
        sort_records(&mut out);
        Ok(out)
    };
    match cfg.workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(run),
        None => run(),
    }
}

/// Writes records as CSV. With `timing` the non-deterministic wall time
/// column is appended.
pub fn write_records<W: Write>(records: &[SweepRecord], mut out: W, timing: bool) -> Result<()> {
    writeln!(out, "{SWEEP_SCHEMA}").map_err(|e| Error::io("sweep csv", e))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "n",
        "m",
        "label",
        "mode",
        "spread_method",
        "success_prob",
        "stderr",
        "gamma1",
        "t1",
    ];
    if timing {
        header.push("wall_time");
    }
    w.write_record(&header)?;
    for r in records {
        let mut row = vec![
            r.n.to_string(),
            r.m.to_string(),
            r.label.clone(),
            r.mode.to_string(),
            r.spread_method.to_string(),
            r.success_prob.to_string(),
            r.stderr.to_string(),
            r.gamma1.to_string(),
            r.t1.to_string(),
        ];
        if timing {
            row.push(r.wall_time.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io("sweep csv", e))?;
    Ok(())
}

/// Reads records written by [`write_records`].
pub fn read_records<R: Read>(input: R) -> Result<Vec<SweepRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(input);
    let headers = rdr.headers()?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::parse("sweep csv", format!("missing column '{name}'")))
    };
    let cols = [
        col("n")?,
        col("m")?,
        col("label")?,
        col("mode")?,
        col("spread_method")?,
        col("success_prob")?,
        col("stderr")?,
        col("gamma1")?,
        col("t1")?,
    ];
    let wall = headers.iter().position(|h| h == "wall_time");
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row?;
        let get = |i: usize| row.get(cols[i]).unwrap_or("");
        out.push(SweepRecord {
            n: parse_value("n", get(0))?,
            m: parse_value("m", get(1))?,
            label: get(2).to_string(),
            mode: get(3).parse()?,
            spread_method: get(4).parse()?,
            success_prob: parse_value("success_prob", get(5))?,
            stderr: parse_value("stderr", get(6))?,
            gamma1: parse_value("gamma1", get(7))?,
            t1: parse_value("t1", get(8))?,
            wall_time: wall
                .and_then(|i| row.get(i))
                .map(|v| parse_value("wall_time", v))
                .transpose()?
                .unwrap_or(0.0),
        });
    }
    Ok(out)
}

/// Median; the mean of the middle pair for even lengths.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty("median input"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    Ok(if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    })
}

/// Sample median and its bootstrap standard error (standard deviation of
/// the medians of `resamples` with-replacement resamples).
pub fn median_bootstrap(values: &[f64], resamples: usize, seed: u64) -> Result<(f64, f64)> {
    let med = median(values)?;
    if resamples < 2 {
        return Err(Error::InvalidParameter(
            "need at least two bootstrap resamples".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let k = values.len();
    let mut buf = vec![0.0; k];
    let medians: Vec<f64> = (0..resamples)
        .map(|_| {
            for b in buf.iter_mut() {
                *b = values[rng.random_range(0..k)];
            }
            median(&buf).expect("nonempty")
        })
        .collect();
    let mean = medians.iter().sum::<f64>() / resamples as f64;
    let var = medians.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (resamples - 1) as f64;
    Ok((med, var.sqrt()))
}

/// Median success probability at one `(n, m)` point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub n: usize,
    pub m: usize,
    pub mode: Mode,
    pub count: usize,
    pub median: f64,
    pub stderr: f64,
}

/// Groups records by `(mode, m, n)` and bootstraps each median.
pub fn summarize(
    records: &[SweepRecord],
    resamples: usize,
    seed: u64,
) -> Result<Vec<PointSummary>> {
    let mut groups: BTreeMap<(Mode, usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups
            .entry((r.mode, r.m, r.n))
            .or_default()
            .push(r.success_prob);
    }
    groups
        .into_iter()
        .map(|((mode, m, n), values)| {
            let (median, stderr) = median_bootstrap(&values, resamples, point_seed(seed, n, 0, m))?;
            Ok(PointSummary {
                n,
                m,
                mode,
                count: values.len(),
                median,
                stderr,
            })
        })
        .collect()
}

/// `ln P = a n + b` fitted for one stage count.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegressionFit {
    pub m: usize,
    pub a: f64,
    pub b: f64,
    pub a_stderr: f64,
    pub b_stderr: f64,
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares of `y` on `x` with classical standard errors.
/// Returns `(slope, intercept, slope_se, intercept_se, r2)`.
pub fn linear_regression(x: &[f64], y: &[f64]) -> Result<(f64, f64, f64, f64, f64)> {
    let k = x.len();
    if k != y.len() {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: y.len(),
        });
    }
    if k < 3 {
        return Err(Error::InsufficientData(format!(
            "regression needs >= 3 points, got {k}"
        )));
    }
    let kf = k as f64;
    let xm = x.iter().sum::<f64>() / kf;
    let ym = y.iter().sum::<f64>() / kf;
    let sxx: f64 = x.iter().map(|v| (v - xm).powi(2)).sum();
    let syy: f64 = y.iter().map(|v| (v - ym).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all x values identical".into()));
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let s2 = ssr / (kf - 2.0);
    let slope_se = (s2 / sxx).sqrt();
    let intercept_se = (s2 * (1.0 / kf + xm * xm / sxx)).sqrt();
    let r2 = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };
    Ok((slope, intercept, slope_se, intercept_se, r2))
}

/// Fits `ln(median P)` against `n` separately for each stage count.
///
/// Points with a zero median are dropped with a warning. Stage counts
/// with fewer than three usable sizes are skipped with a warning; an error
/// is returned only if nothing could be fitted.
pub fn fit_scaling(records: &[SweepRecord]) -> Result<Vec<RegressionFit>> {
    let mut by_point: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        by_point.entry((r.m, r.n)).or_default().push(r.success_prob);
    }
    let mut per_m: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for ((m, n), values) in by_point {
        let med = median(&values)?;
        if med > 0.0 {
            let e = per_m.entry(m).or_default();
            e.0.push(n as f64);
            e.1.push(med.ln());
        } else {
            warn!("dropping n = {n}, m = {m}: median success probability is {med}");
        }
    }
    let mut fits = Vec::new();
    for (m, (x, y)) in per_m {
        match linear_regression(&x, &y) {
            Ok((a, b, a_stderr, b_stderr, r2)) => fits.push(RegressionFit {
                m,
                a,
                b,
                a_stderr,
                b_stderr,
                r2,
                points: x.len(),
            }),
            Err(e) => warn!("skipping m = {m}: {e}"),
        }
    }
    if fits.is_empty() {
        return Err(Error::InsufficientData(
            "no stage count has >= 3 usable sizes".into(),
        ));
    }
    Ok(fits)
}

/// Instances kept by [`curate_hard`].
#[derive(Debug, Clone)]
pub struct CurationResult {
    pub problems: Vec<IsingProblem>,
    pub gaps: Vec<f64>,
    pub attempts: usize,
    pub acceptance_rate: f64,
}

const CURATION_BATCH: usize = 64;
const CURATION_GRACE: usize = 100_000;

/// Rejection-samples SK instances until `count` have a minimum gap of at
/// most `gap_threshold`. Candidates are examined in index order, so the
/// result does not depend on thread count.
pub fn curate_hard(
    n: usize,
    count: usize,
    gap_threshold: f64,
    seed: u64,
    scale_sqrt2: bool,
) -> Result<CurationResult> {
    if n > DEFAULT_QUBIT_CAP {
        return Err(Error::QubitCapExceeded {
            n,
            cap: DEFAULT_QUBIT_CAP,
        });
    }
    let mut problems = Vec::with_capacity(count);
    let mut gaps = Vec::with_capacity(count);
    let mut attempts = 0usize;
    let mut next = 0usize;
    while problems.len() < count {
        let batch: Vec<(IsingProblem, f64)> = (next..next + CURATION_BATCH)
            .into_par_iter()
            .map(|i| {
                let p = sk_instance(n, seed, i, scale_sqrt2)?;
                let gap = brute_force_spectrum_with(&p, DEFAULT_QUBIT_CAP, false)?.min_gap;
                Ok((p, gap))
            })
            .collect::<Result<_>>()?;
        next += CURATION_BATCH;
        for (p, gap) in batch {
            if problems.len() == count {
                break;
            }
            attempts += 1;
            if gap <= gap_threshold {
                problems.push(p);
                gaps.push(gap);
            }
        }
        let rate = problems.len() as f64 / attempts as f64;
        if problems.len() < count && attempts >= CURATION_GRACE && rate < MIN_ACCEPTANCE_RATE {
            return Err(Error::AcceptanceTooLow { rate, attempts });
        }
    }
    let acceptance_rate = if attempts == 0 {
        1.0
    } else {
        problems.len() as f64 / attempts as f64
    };
    Ok(CurationResult {
        problems,
        gaps,
        attempts,
        acceptance_rate,
    })
}

/// Re-checks the gap predicate on previously curated instances.
pub fn verify_curated(problems: &[IsingProblem], gap_threshold: f64) -> Result<bool> {
    for p in problems {
        if brute_force_spectrum_with(p, DEFAULT_QUBIT_CAP, false)?.min_gap > gap_threshold {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Per-stage medians keyed by `m`, for quick comparisons.
pub fn medians_by_stage(records: &[SweepRecord]) -> Result<HashMap<usize, f64>> {
    let mut groups: HashMap<usize, Vec<f64>> = HashMap::new();
    for r in records {
        groups.entry(r.m).or_default().push(r.success_prob);
    }
    groups
        .into_iter()
        .map(|(m, v)| Ok((m, median(&v)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_of_constant_list() {
        let (m, se) = median_bootstrap(&[0.25; 17], 1000, 3).unwrap();
        assert_eq!(m, 0.25);
        assert_eq!(se, 0.0);
    }

    #[test]
    fn median_is_robust() {
        let (m, se) = median_bootstrap(&[1.0, 2.0, 100.0], 1000, 3).unwrap();
        assert_eq!(m, 2.0);
        assert!(se > 0.0);
        assert!(median_bootstrap(&[], 10, 0).is_err());
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]).unwrap(), 2.5);
    }

    #[test]
    fn exact_linear_fit() {
        let x: Vec<f64> = (5..=12).map(|v| v as f64).collect();
        let y: Vec<f64> = x.iter().map(|n| -0.3 * n + 0.1).collect();
        let (a, b, sa, sb, r2) = linear_regression(&x, &y).unwrap();
        assert!((a + 0.3).abs() < 1e-12);
        assert!((b - 0.1).abs() < 1e-12);
        assert!(sa < 1e-12 && sb < 1e-11);
        assert!((r2 - 1.0).abs() < 1e-12);
        assert!(linear_regression(&x[..2], &y[..2]).is_err());
    }

    #[test]
    fn regression_standard_errors() {
        // Hand-computed: x = 0..4, y = (0, 1, 1, 3, 4)
        // slope 1, intercept -0.2, residuals (0.2, 0.2, -0.8, 0.2, 0.2),
        // SSR = 0.8, s^2 = 0.8 / 3, Sxx = 10
        let (a, b, sa, sb, r2) =
            linear_regression(&[0.0, 1.0, 2.0, 3.0, 4.0], &[0.0, 1.0, 1.0, 3.0, 4.0]).unwrap();
        let s2: f64 = 0.8 / 3.0;
        assert!((a - 1.0).abs() < 1e-12);
        assert!((b + 0.2).abs() < 1e-12);
        assert!((sa - (s2 / 10.0).sqrt()).abs() < 1e-12);
        assert!((sb - (s2 * (0.2 + 4.0 / 10.0)).sqrt()).abs() < 1e-12);
        assert!((r2 - (1.0 - 0.8 / 10.8)).abs() < 1e-12);
    }

    fn record(n: usize, m: usize, label: &str, p: f64) -> SweepRecord {
        SweepRecord {
            n,
            m,
            label: label.into(),
            mode: Mode::ShortTimeMc,
            spread_method: SpreadMethod::Gumbel,
            success_prob: p,
            stderr: 0.0,
            gamma1: 1.0,
            t1: 0.5,
            wall_time: 0.0,
        }
    }

    #[test]
    fn fit_drops_zero_medians() {
        let mut recs: Vec<SweepRecord> = (5..=9)
            .map(|n| record(n, 1, "x", (-0.3 * n as f64 + 0.1).exp()))
            .collect();
        recs.push(record(10, 1, "x", 0.0));
        let fits = fit_scaling(&recs).unwrap();
        assert_eq!(fits[0].points, 5);
        assert!((fits[0].a + 0.3).abs() < 1e-12);
        assert!(fit_scaling(&recs[..2]).is_err());
    }

    #[test]
    fn records_round_trip_through_csv() {
        let recs = vec![record(5, 1, "a", 0.125), record(5, 2, "a", 0.3)];
        let mut buf = Vec::new();
        write_records(&recs, &mut buf, false).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(SWEEP_SCHEMA));
        assert_eq!(read_records(&buf[..]).unwrap(), recs);
    }

    #[test]
    fn config_text_and_overrides() {
        let mut cfg = SweepConfig::parse(
            "# sweep\nn_min = 5\nn-max = 7\nstages = 1, 2,5\nmode = infinite-time\nspread-method = normal-fit\n",
        )
        .unwrap();
        assert_eq!((cfg.n_min, cfg.n_max), (5, 7));
        assert_eq!(cfg.stages, vec![1, 2, 5]);
        assert_eq!(cfg.mode, Mode::InfiniteTime);
        cfg.set("samples", "3").unwrap();
        assert_eq!(cfg.samples, 3);
        assert!(cfg.set("bogus", "1").is_err());
        assert!(SweepConfig::parse("n-min 5").is_err());
    }

    #[test]
    fn infinite_mode_cap() {
        let cfg = SweepConfig {
            n_max: 13,
            mode: Mode::InfiniteTime,
            ..SweepConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(Error::QubitCapExceeded { cap: 12, .. })
        ));
    }

    #[test]
    fn gamma_zero_sweep_gives_ground_fraction() {
        let cfg = SweepConfig {
            n_min: 5,
            n_max: 5,
            instances: 1,
            samples: 3,
            gamma: Some(0.0),
            ..SweepConfig::default()
        };
        let recs = sweep(&cfg, &[]).unwrap();
        assert_eq!(recs.len(), 1);
        let p = sk_instance(5, 0, 0, false).unwrap();
        let g = brute_force_spectrum_with(&p, 24, false)
            .unwrap()
            .ground_indices
            .len();
        assert!((recs[0].success_prob - g as f64 / 32.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_resumes() {
        let cfg = SweepConfig {
            n_min: 4,
            n_max: 5,
            instances: 2,
            samples: 2,
            stages: vec![1, 2],
            ..SweepConfig::default()
        };
        let full = sweep(&cfg, &[]).unwrap();
        assert_eq!(full.len(), 8);
        let resumed = sweep(&cfg, &full[..3]).unwrap();
        let untimed = |v: Vec<SweepRecord>| {
            v.into_iter()
                .map(|r| SweepRecord {
                    wall_time: 0.0,
                    ..r
                })
                .collect::<Vec<_>>()
        };
        assert_eq!(untimed(resumed), untimed(full));
    }

    #[test]
    fn curation_with_infinite_threshold() {
        let r = curate_hard(5, 4, f64::INFINITY, 1, false).unwrap();
        assert_eq!(r.attempts, 4);
        assert_eq!(r.acceptance_rate, 1.0);
        for (i, p) in r.problems.iter().enumerate() {
            assert_eq!(p, &sk_instance(5, 1, i, false).unwrap());
        }
    }

    #[test]
    fn curation_gives_up_on_impossible_threshold() {
        let err = curate_hard(3, 1, -1.0, 1, false).unwrap_err();
        assert!(matches!(err, Error::AcceptanceTooLow { .. }));
    }

    #[test]
    fn worked_instance_is_rejected() {
        let p = IsingProblem::new(vec![1.0, -0.5], &[(1, 0, 2.0)]).unwrap();
        assert!(!verify_curated(&[p], 0.1).unwrap());
    }
}
