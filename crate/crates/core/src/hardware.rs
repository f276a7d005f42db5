//! Mapping dimensionless walk times onto an annealer's energy scales.
//!
//! Energies in schedule tables are in GHz, i.e. `E / h`. A stage of
//! dimensionless length `t` at anneal fraction `s` therefore takes
//! `alpha * t / (2 pi A(s))` nanoseconds.

use std::f64::consts::PI;
use std::io::Read;
use std::path::Path;

use log::warn;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::schedule::WalkSchedule;

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes; it
/// preserves monotonicity of the data.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let k = x.len();
        if k < 2 || y.len() != k {
            return Err(Error::InsufficientData(
                "interpolation needs at least two matching samples".into(),
            ));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "knots must be strictly increasing".into(),
            ));
        }
        let secants: Vec<f64> = (0..k - 1)
            .map(|i| (y[i + 1] - y[i]) / (x[i + 1] - x[i]))
            .collect();
        let mut slopes = vec![0.0; k];
        slopes[0] = secants[0];
        slopes[k - 1] = secants[k - 2];
        for i in 1..k - 1 {
            let (a, b) = (secants[i - 1], secants[i]);
            slopes[i] = if a * b <= 0.0 {
                0.0
            } else {
                // weighted harmonic mean
                let (h0, h1) = (x[i] - x[i - 1], x[i + 1] - x[i]);
                let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
                (w1 + w2) / (w1 / a + w2 / b)
            };
        }
        for i in 0..k - 1 {
            let d = secants[i];
            if d == 0.0 {
                slopes[i] = 0.0;
                slopes[i + 1] = 0.0;
                continue;
            }
            let (alpha, beta) = (slopes[i] / d, slopes[i + 1] / d);
            let r = alpha * alpha + beta * beta;
            if r > 9.0 {
                let tau = 3.0 / r.sqrt();
                slopes[i] = tau * alpha * d;
                slopes[i + 1] = tau * beta * d;
            }
        }
        Ok(Self { x, y, slopes })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn segment(&self, t: f64) -> usize {
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            p => (p - 1).min(self.x.len() - 2),
        }
    }

    /// Evaluates the interpolant, clamping to the end knots.
    pub fn eval(&self, t: f64) -> f64 {
        let (lo, hi) = self.domain();
        let t = t.clamp(lo, hi);
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let u = (t - self.x[i]) / h;
        let (u2, u3) = (u * u, u * u * u);
        (2.0 * u3 - 3.0 * u2 + 1.0) * self.y[i]
            + (u3 - 2.0 * u2 + u) * h * self.slopes[i]
            + (-2.0 * u3 + 3.0 * u2) * self.y[i + 1]
            + (u3 - u2) * h * self.slopes[i + 1]
    }
}

/// Annealer schedule samples `(s, A(s), B(s))` with energies in GHz.
#[derive(Debug, Clone)]
pub struct HardwareSchedule {
    pub s: Vec<f64>,
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl HardwareSchedule {
    pub fn new(s: Vec<f64>, a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if s.len() < 2 || a.len() != s.len() || b.len() != s.len() {
            return Err(Error::InsufficientData(
                "hardware schedule needs at least two complete rows".into(),
            ));
        }
        if s.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "anneal fraction must be strictly increasing".into(),
            ));
        }
        if s.iter().chain(&a).chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("hardware schedule"));
        }
        if a.windows(2).any(|w| w[1] > w[0]) {
            warn!("transverse scale A(s) is not non-increasing");
        }
        if b.windows(2).any(|w| w[1] < w[0]) {
            warn!("problem scale B(s) is not non-decreasing");
        }
        Ok(Self { s, a, b })
    }

    /// Parses a three-column delimited table (comma, tab or whitespace).
    /// A non-numeric first line is treated as a header; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let (mut s, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line
                .split(|c: char| c == ',' || c == ';' || c.is_whitespace())
                .filter(|f| !f.is_empty())
                .collect();
            let parsed: std::result::Result<Vec<f64>, _> =
                fields.iter().take(3).map(|f| f.parse::<f64>()).collect();
            match parsed {
                Ok(v) if v.len() == 3 => {
                    s.push(v[0]);
                    a.push(v[1]);
                    b.push(v[2]);
                }
                _ if s.is_empty() && a.is_empty() => continue,
                _ => {
                    return Err(Error::parse(
                        "hardware schedule",
                        format!("line {}: expected three numbers", lineno + 1),
                    ))
                }
            }
        }
        Self::new(s, a, b)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut text = String::new();
        std::fs::File::open(path)
            .and_then(|mut f| f.read_to_string(&mut text))
            .map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

/// Default problem rescale `2 sqrt(ln n)`.
pub fn default_alpha(n: usize) -> f64 {
    2.0 * (n as f64).ln().max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StageTiming {
    pub s: f64,
    pub a_ghz: f64,
    pub ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HardwareTiming {
    pub alpha: f64,
    pub stages: Vec<StageTiming>,
    pub total_ns: f64,
}

/// Converts every stage into wall-clock nanoseconds on `hw`.
///
/// Stage `k` runs at the anneal fraction where `A/B = gamma_k / alpha`,
/// found by inverting a monotone cubic fit of the `A/B` curve.
pub fn hardware_time(
    schedule: &WalkSchedule,
    hw: &HardwareSchedule,
    alpha: f64,
) -> Result<HardwareTiming> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    let ratio: Vec<f64> = hw.a.iter().zip(&hw.b).map(|(a, b)| a / b).collect();
    if ratio.iter().any(|r| !r.is_finite()) {
        return Err(Error::NonFinite("A/B ratio"));
    }
    let ratio_curve = MonotoneCubic::new(hw.s.clone(), ratio.clone())?;
    let a_curve = MonotoneCubic::new(hw.s.clone(), hw.a.clone())?;
    let (rmin, rmax) = ratio
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &r| {
            (lo.min(r), hi.max(r))
        });

    let mut stages = Vec::with_capacity(schedule.m());
    for stage in &schedule.stages {
        let target = stage.gamma / alpha;
        if !(rmin..=rmax).contains(&target) {
            return Err(Error::RatioOutOfRange {
                ratio: target,
                min: rmin,
                max: rmax,
            });
        }
        let s = invert_ratio(&hw.s, &ratio, &ratio_curve, target)?;
        let a_ghz = a_curve.eval(s);
        if !(a_ghz > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "transverse scale vanishes at s = {s}"
            )));
        }
        stages.push(StageTiming {
            s,
            a_ghz,
            ns: alpha * stage.time / (2.0 * PI * a_ghz),
        });
    }
    let total_ns = stages.iter().map(|t| t.ns).sum();
    Ok(HardwareTiming {
        alpha,
        stages,
        total_ns,
    })
}

fn invert_ratio(s: &[f64], ratio: &[f64], curve: &MonotoneCubic, target: f64) -> Result<f64> {
    // bracketing knot interval
    let i = (0..ratio.len() - 1)
        .find(|&i| {
            let (lo, hi) = (ratio[i].min(ratio[i + 1]), ratio[i].max(ratio[i + 1]));
            (lo..=hi).contains(&target)
        })
        .ok_or(Error::RatioOutOfRange {
            ratio: target,
            min: f64::NAN,
            max: f64::NAN,
        })?;
    let neighbours = i.saturating_sub(1)..(i + 3).min(ratio.len());
    let window = &ratio[neighbours];
    let inc = window.windows(2).all(|w| w[1] >= w[0]);
    let dec = window.windows(2).all(|w| w[1] <= w[0]);
    if !inc && !dec {
        return Err(Error::NonMonotoneSchedule(s[i]));
    }
    let (mut lo, mut hi) = (s[i], s[i + 1]);
    let increasing = ratio[i + 1] >= ratio[i];
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let above = curve.eval(mid) > target;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
