//! Scalar special functions.

use crate::error::{Error, Result};

/// `(e^{-a t} - e^{-b t}) / (b - a)`, the response of a rate-`b` filter to a
/// rate-`a` exponential. Symmetric in `(a, b)` and continuous at `a = b`
/// (where it equals `t e^{-a t}`); evaluated through `expm1` so nearby rates
/// do not cancel.
pub fn exp_diff_ratio(a: f64, b: f64, t: f64) -> f64 {
    let lo = a.min(b);
    let gap = (a - b).abs();
    let base = (-lo * t).exp();
    if gap == 0.0 {
        return t * base;
    }
    base * (-(-gap * t).exp_m1() / gap)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 10_000;

/// Series `Σ x^n / (a (a+1) ... (a+n))`, so that
/// `γ(a, x) = x^a e^{-x} · series`. Converges fast for `x < a + 1`.
fn gamma_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut ap = a;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum
}

/// Continued fraction (modified Lentz) with
/// `Γ(a, x) = x^a e^{-x} · fraction`. Used for `x >= a + 1`.
fn gamma_continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn check_args(alpha: f64, x: f64) -> Result<()> {
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(Error::param("alpha", format!("must be positive, got {alpha}")));
    }
    if x.is_nan() || x < 0.0 {
        return Err(Error::param("x", format!("must be non-negative, got {x}")));
    }
    Ok(())
}

/// Regularized lower incomplete gamma `P(α, x) = γ(α, x) / Γ(α)`.
pub fn regularized_lower_gamma(alpha: f64, x: f64) -> Result<f64> {
    check_args(alpha, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let log_prefix = alpha * x.ln() - x - ln_gamma(alpha);
    if x < alpha + 1.0 {
        Ok((log_prefix.exp() * gamma_series(alpha, x)).min(1.0))
    } else {
        Ok((1.0 - log_prefix.exp() * gamma_continued_fraction(alpha, x)).max(0.0))
    }
}

/// Lower incomplete gamma `γ(α, x) = ∫_0^x s^{α-1} e^{-s} ds` for `x >= 0`.
pub fn lower_incomplete_gamma(alpha: f64, x: f64) -> Result<f64> {
    check_args(alpha, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if x < alpha + 1.0 {
        Ok((alpha * x.ln() - x).exp() * gamma_series(alpha, x))
    } else {
        let upper = (alpha * x.ln() - x).exp() * gamma_continued_fraction(alpha, x);
        Ok(ln_gamma(alpha).exp() - upper)
    }
}
