//! Special functions: error function family, normal quantiles and Bessel
//! functions of the first kind.

use std::f64::consts::{PI, SQRT_2};

/// Euler–Mascheroni constant.
pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Below this `erf` uses its power series, above it `erfc` uses the
/// continued fraction.
const SERIES_CUTOFF: f64 = 2.0;

/// Error function.
pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let a = x.abs();
    let v = if a < SERIES_CUTOFF {
        erf_series(a)
    } else {
        1.0 - erfc_fraction(a)
    };
    v.copysign(x)
}

/// Complementary error function, accurate in relative terms for large `x`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < SERIES_CUTOFF {
        1.0 - erf_series(x)
    } else {
        erfc_fraction(x)
    }
}

// erf(x) = 2/sqrt(pi) e^{-x^2} sum_k (2x^2)^k x / (1*3*...*(2k+1)); all
// terms positive.
fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= 2.0 * x2 / (2.0 * k + 1.0);
        sum += term;
        if term <= sum * 1e-17 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

// Modified Lentz evaluation of
// erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...)))).
fn erfc_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = f;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Standard normal cumulative distribution.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal quantile `Phi^{-1}(p)` for `p` in (0, 1).
///
/// Acklam's rational approximation followed by Halley refinement against
/// [`erfc`]. Returns `-inf`/`+inf` at 0 and 1 and NaN outside.
pub fn normal_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }
    if p > 0.5 {
        -lower_quantile(1.0 - p)
    } else {
        lower_quantile(p)
    }
}

/// `Phi^{-1}(1 - tail)` computed without forming `1 - tail`.
pub fn normal_upper_quantile(tail: f64) -> f64 {
    if tail.is_nan() || !(0.0..=1.0).contains(&tail) {
        return f64::NAN;
    }
    if tail == 0.0 {
        return f64::INFINITY;
    }
    if tail == 1.0 {
        return f64::NEG_INFINITY;
    }
    if tail > 0.5 {
        lower_quantile(1.0 - tail)
    } else {
        -lower_quantile(tail)
    }
}

// Quantile for p in (0, 0.5].
fn lower_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_690e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    let mut x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    };

    // x <= 0 here, so Phi(x) = erfc(-x / sqrt 2) / 2 has no cancellation.
    for _ in 0..2 {
        let e = 0.5 * erfc(-x / SQRT_2) - p;
        let u = e * (2.0 * PI).sqrt() * (0.5 * x * x).exp();
        x -= u / (1.0 + 0.5 * x * u);
    }
    x
}

/// Inverse error function on (-1, 1).
pub fn erf_inv(y: f64) -> f64 {
    if y.is_nan() || !(-1.0..=1.0).contains(&y) {
        return f64::NAN;
    }
    if y == 0.0 {
        return y;
    }
    if y.abs() == 1.0 {
        return f64::INFINITY.copysign(y);
    }
    let a = y.abs();
    let x = if a <= 0.5 {
        // Newton on erf keeps relative accuracy for tiny arguments, where
        // forming (1 - a) / 2 would not.
        let mut x = -lower_quantile(0.5 * (1.0 - a)) / SQRT_2;
        if x == 0.0 {
            x = 0.5 * PI.sqrt() * a;
        }
        for _ in 0..2 {
            x -= (erf(x) - a) / (FRAC_2_SQRT_PI * (-x * x).exp());
        }
        x
    } else {
        erfc_inv(1.0 - a)
    };
    x.copysign(y)
}

/// Inverse complementary error function on (0, 2).
pub fn erfc_inv(q: f64) -> f64 {
    if q.is_nan() || !(0.0..=2.0).contains(&q) {
        return f64::NAN;
    }
    if q == 0.0 {
        return f64::INFINITY;
    }
    if q == 2.0 {
        return f64::NEG_INFINITY;
    }
    if q > 1.0 {
        return -erfc_inv(2.0 - q);
    }
    -lower_quantile(0.5 * q) / SQRT_2
}

/// Values `J_0(x), J_1(x), ..., J_kmax(x)` of Bessel functions of the first
/// kind.
///
/// Miller's downward recurrence, started well above both `kmax` and `x`
/// and normalised with `J_0 + 2 sum_{k>=1} J_{2k} = 1`.
pub fn bessel_j_sequence(x: f64, kmax: usize) -> Vec<f64> {
    let mut out = vec![0.0; kmax + 1];
    if x == 0.0 {
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let top = (kmax as f64).max(ax);
    let mut start = (top + 30.0 + (60.0 * top).sqrt()).ceil() as usize;
    start += start % 2;

    let mut values = vec![0.0; start + 2];
    values[start] = 1e-30;
    for k in (1..=start).rev() {
        values[k - 1] = 2.0 * k as f64 / ax * values[k] - values[k + 1];
        if values[k - 1].abs() > 1e250 {
            for v in values[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = values[0] + 2.0 * values.iter().skip(2).step_by(2).sum::<f64>();
    for (k, o) in out.iter_mut().enumerate() {
        let v = if k <= start { values[k] / norm } else { 0.0 };
        // J_k(-x) = (-1)^k J_k(x)
        *o = if x < 0.0 && k % 2 == 1 { -v } else { v };
    }
    out
}
