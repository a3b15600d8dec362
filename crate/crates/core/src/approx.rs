//! Optimal approximating curves `F_p` and their drifts `f_p = I^{-1} F_p`.
//!
//! For an even cost exponent `p` the optimal `F_p(t)` is the root in `x` of
//! `E[(x - Z(t))^{p-1}] = 0`, which is nondecreasing in `x`. For `p = 2` that
//! is `E[Z(t)]`; for `p = 4` it is the unique real root of the cubic
//! `x^3 - 3 m1 x^2 + 3 m2 x - m3` built from the raw moments of `Z(t)`.

use std::io::{self, Write};

use serde::Serialize;

use crate::drift::{mean_accumulated, mean_z, DriftModel};
use crate::error::{Error, Result};
use crate::sde::apply_i_inv;
use crate::timebase::{fmt_f64, fold_paths, pairwise_sum, Curve, PathSource, TimeGrid};

/// Default absolute tolerance for the node-wise root solves.
pub const ROOT_TOL: f64 = 1e-13;

const MAX_BISECTIONS: usize = 2_000;

/// Pointwise raw moments of `Z(t)`, the matching central moments, and the
/// standard error of the first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentCurves {
    pub grid: TimeGrid,
    pub m1: Curve,
    pub m2: Curve,
    pub m3: Curve,
    pub c2: Curve,
    pub c3: Curve,
    pub se1: Curve,
}

impl MomentCurves {
    /// Sample moments over every path of `source` (denominator `n`). The
    /// sums are taken about path 0, which keeps the central moments free of
    /// cancellation and makes a degenerate ensemble reproduce its common path
    /// exactly.
    pub fn from_source<S: PathSource>(source: &S) -> Result<Self> {
        let n = source.n_paths();
        if n < 2 {
            return Err(Error::param("n_paths", "need at least two paths for moments"));
        }
        let grid = *source.grid();
        let len = grid.len();
        let reference = source.with_path(0, |p| p.to_vec());
        let sums = fold_paths(source, 3 * len, |_, p, acc| {
            let (s1, rest) = acc.split_at_mut(len);
            let (s2, s3) = rest.split_at_mut(len);
            for k in 0..len {
                let d = p[k] - reference[k];
                let d2 = d * d;
                s1[k] += d;
                s2[k] += d2;
                s3[k] += d2 * d;
            }
        });
        let nf = n as f64;
        let (mut m1, mut m2, mut m3, mut se1) = (
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
            Vec::with_capacity(len),
        );
        let (mut cc2, mut cc3) = (Vec::with_capacity(len), Vec::with_capacity(len));
        for k in 0..len {
            let a = sums[k] / nf;
            let b = sums[len + k] / nf;
            let c = sums[2 * len + k] / nf;
            let c2 = (b - a * a).max(0.0);
            let c3 = c - 3.0 * a * b + 2.0 * a * a * a;
            let mean = reference[k] + a;
            m1.push(mean);
            m2.push(mean * mean + c2);
            m3.push(mean * mean * mean + 3.0 * mean * c2 + c3);
            se1.push((c2 / (nf - 1.0)).sqrt());
            cc2.push(c2);
            cc3.push(c3);
        }
        Ok(MomentCurves {
            grid,
            m1: Curve::new(grid, m1)?,
            m2: Curve::new(grid, m2)?,
            m3: Curve::new(grid, m3)?,
            c2: Curve::new(grid, cc2)?,
            c3: Curve::new(grid, cc3)?,
            se1: Curve::new(grid, se1)?,
        })
    }

    /// Moments of a Gaussian `Z(t)` with the given mean and variance curves.
    pub fn gaussian(mean: &Curve, var: &Curve) -> Result<Self> {
        mean.check_same_grid(var)?;
        let m2 = mean.zip_with(var, |m, v| m * m + v)?;
        let m3 = mean.zip_with(var, |m, v| m * m * m + 3.0 * m * v)?;
        Ok(MomentCurves {
            grid: *mean.grid(),
            m1: mean.clone(),
            m2,
            m3,
            c2: var.clone(),
            c3: Curve::zeros(*mean.grid()),
            se1: Curve::zeros(*mean.grid()),
        })
    }

    /// Checks `m2 >= m1^2` (up to rounding) at every node.
    pub fn validate(&self) -> Result<()> {
        for (k, (&a, &b)) in self.m1.values().iter().zip(self.m2.values()).enumerate() {
            check_moment_pair(a, b).map_err(|_| Error::InvalidMoments {
                node: k,
                m2: b,
                m1_sq: a * a,
            })?;
        }
        Ok(())
    }
}

fn check_moment_pair(m1: f64, m2: f64) -> Result<()> {
    let m1_sq = m1 * m1;
    if m2 - m1_sq < -8.0 * f64::EPSILON * m2.abs().max(m1_sq) {
        return Err(Error::InvalidMoments { node: 0, m2, m1_sq });
    }
    Ok(())
}

/// An optimal curve `F` and the drift `f` of the approximating SDE.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Approximant {
    pub order: u32,
    pub accumulated: Curve,
    pub drift: Curve,
    pub theta: f64,
}

impl Approximant {
    /// Recovers the drift as `I^{-1} F` by finite differences.
    pub fn from_curve(order: u32, accumulated: Curve, theta: f64) -> Result<Self> {
        let drift = apply_i_inv(&accumulated, theta)?;
        Ok(Approximant {
            order,
            accumulated,
            drift,
            theta,
        })
    }

    /// Pairs a curve with a drift known independently.
    pub fn from_parts(order: u32, accumulated: Curve, drift: Curve, theta: f64) -> Result<Self> {
        accumulated.check_same_grid(&drift)?;
        if accumulated.first().abs() > 1e-12 {
            return Err(Error::NonzeroStart(accumulated.first()));
        }
        Ok(Approximant {
            order,
            accumulated,
            drift,
            theta,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        self.accumulated.grid()
    }

    /// `t,F,f`
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,F,f")?;
        let g = self.grid();
        for k in 0..g.len() {
            writeln!(
                out,
                "{},{},{}",
                fmt_f64(g.t(k)),
                fmt_f64(self.accumulated.values()[k]),
                fmt_f64(self.drift.values()[k])
            )?;
        }
        Ok(())
    }
}

/// Result of a bracketed bisection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RootSolve {
    pub root: f64,
    pub residual: f64,
    pub iterations: usize,
}

fn spacing(x: f64) -> f64 {
    x.abs().max(f64::MIN_POSITIVE) * f64::EPSILON
}

/// Bisection for a nondecreasing `g` with `g(lo) <= 0 <= g(hi)`. Stops when
/// the bracket is narrower than `max(tol, 8 ulp)` or `g` vanishes exactly.
pub fn bisect_increasing(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> Result<RootSolve> {
    let (f_lo, f_hi) = (g(lo), g(hi));
    if !(f_lo <= 0.0 && f_hi >= 0.0) {
        return Err(Error::NotBracketed { lo, hi, f_lo, f_hi });
    }
    if f_lo == 0.0 {
        return Ok(RootSolve {
            root: lo,
            residual: 0.0,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(RootSolve {
            root: hi,
            residual: 0.0,
            iterations: 0,
        });
    }
    let mut iterations = 0;
    while iterations < MAX_BISECTIONS {
        let width = hi - lo;
        if width <= tol.max(8.0 * spacing(lo.abs().max(hi.abs()))) {
            break;
        }
        iterations += 1;
        let mid = lo + 0.5 * width;
        let v = g(mid);
        if v == 0.0 {
            return Ok(RootSolve {
                root: mid,
                residual: 0.0,
                iterations,
            });
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = lo + 0.5 * (hi - lo);
    Ok(RootSolve {
        root,
        residual: g(root),
        iterations,
    })
}

/// `F_2 = E[Z]` and `f_2 = E[z]`, in closed form where the model has one.
pub fn f2_analytic(model: &DriftModel, theta: f64, grid: &TimeGrid) -> Result<Approximant> {
    let accumulated = mean_accumulated(model, theta, grid)?;
    let drift = mean_z(model, grid)?;
    Approximant::from_parts(2, accumulated, drift, theta)
}

/// The real root of `x^3 - 3 m1 x^2 + 3 m2 x - m3`. Solved in centred form
/// `y^3 + 3 c2 y - c3 = 0` with `x = m1 + y`; the bracket starts at
/// `[-1, 1]` and doubles until it straddles the root.
pub fn cubic_el_root(m1: f64, m2: f64, m3: f64, tol: f64) -> Result<f64> {
    check_moment_pair(m1, m2)?;
    let c2 = (m2 - m1 * m1).max(0.0);
    let c3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
    centred_cubic_root(m1, c2, c3, tol)
}

/// `m1 + y` with `y` the real root of `y^3 + 3 c2 y - c3`, `c2 >= 0`.
pub fn centred_cubic_root(m1: f64, c2: f64, c3: f64, tol: f64) -> Result<f64> {
    if c2.is_nan() || c2 < 0.0 {
        return Err(Error::InvalidMoments {
            node: 0,
            m2: m1 * m1 + c2,
            m1_sq: m1 * m1,
        });
    }
    let g = |y: f64| y * (y * y + 3.0 * c2) - c3;
    let (mut lo, mut hi) = (-1.0f64, 1.0f64);
    while g(lo) > 0.0 {
        lo *= 2.0;
        if !lo.is_finite() {
            return Err(Error::NotBracketed {
                lo,
                hi,
                f_lo: g(lo),
                f_hi: g(hi),
            });
        }
    }
    while g(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NotBracketed {
                lo,
                hi,
                f_lo: g(lo),
                f_hi: g(hi),
            });
        }
    }
    let y = bisect_increasing(g, lo, hi, tol)?.root;
    Ok(m1 + y)
}

/// `F_4` node by node from the central moment curves.
pub fn f4_from_moments(moments: &MomentCurves, theta: f64, tol: f64) -> Result<Approximant> {
    let values = (0..moments.grid.len())
        .map(|k| {
            centred_cubic_root(
                moments.m1.values()[k],
                moments.c2.values()[k],
                moments.c3.values()[k],
                tol,
            )
            .map_err(|e| match e {
                Error::InvalidMoments { m2, m1_sq, .. } => Error::InvalidMoments { node: k, m2, m1_sq },
                other => other,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Approximant::from_curve(4, Curve::new(moments.grid, values)?, theta)
}

fn check_exponent(p: u32) -> Result<()> {
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

fn odd_power_mean(x: f64, samples: &[f64], p: u32) -> f64 {
    let terms: Vec<f64> = samples.iter().map(|z| (x - z).powi(p as i32 - 1)).collect();
    pairwise_sum(&terms) / samples.len() as f64
}

/// Empirical optimal value at one node: the root of
/// `x ↦ mean((x - Z_i)^{p-1})` on `[min Z_i, max Z_i]`.
pub fn fp_root(p: u32, samples: &[f64], tol: f64) -> Result<f64> {
    check_exponent(p)?;
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    if p == 2 {
        return Ok(pairwise_sum(samples) / samples.len() as f64);
    }
    let lo = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = samples.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == hi {
        return Ok(lo);
    }
    Ok(bisect_increasing(|x| odd_power_mean(x, samples, p), lo, hi, tol)?.root)
}

/// `η_2(t) = -θ E[Z(t)] + E[z(t)]`, the slope of `F_2`.
pub fn eta2(model: &DriftModel, theta: f64, grid: &TimeGrid) -> Result<Curve> {
    let big = mean_accumulated(model, theta, grid)?;
    let small = mean_z(model, grid)?;
    big.zip_with(&small, |f, m| -theta * f + m)
}

/// `mean((F_T - Z_i)^{p-1})`; zero when `F_T` is optimal for the terminal
/// cost `|x - Z(T)|^p`.
pub fn transversality_residual(p: u32, terminal_samples: &[f64], terminal_value: f64) -> Result<f64> {
    check_exponent(p)?;
    if terminal_samples.is_empty() {
        return Err(Error::EmptySample);
    }
    Ok(odd_power_mean(terminal_value, terminal_samples, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{accumulated_moments_mc, var_z, Distribution};
    use crate::sde::apply_i;
    use crate::special::exp_diff_ratio;
    use crate::timebase::{derive_stream, trapezoid_slice, PathEnsemble};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    #[test]
    fn cubic_examples() {
        assert_eq!(cubic_el_root(0.0, 1.0, 0.0, ROOT_TOL).unwrap(), 0.0);
        assert_abs_diff_eq!(cubic_el_root(0.5, 1.25, 1.625, ROOT_TOL).unwrap(), 0.5, epsilon = 1e-14);
        // real root of x^3 + 3x - 3 (independent high-precision evaluation)
        assert_abs_diff_eq!(
            cubic_el_root(0.0, 1.0, 3.0, ROOT_TOL).unwrap(),
            0.817_731_673_886_824_4,
            epsilon = 1e-12
        );
        assert!(matches!(
            cubic_el_root(1.0, 0.5, 0.0, ROOT_TOL),
            Err(Error::InvalidMoments { .. })
        ));
        assert_eq!(cubic_el_root(0.0, 0.0, 0.0, ROOT_TOL).unwrap(), 0.0);
    }

    #[test]
    fn cubic_far_from_origin_expands_bracket() {
        let x = cubic_el_root(1e3, 1e6 + 4.0, 1e9 + 12e3 + 500.0, ROOT_TOL).unwrap();
        let (c2, c3) = (4.0, 500.0);
        let y = x - 1e3;
        assert!((y * y * y + 3.0 * c2 * y - c3).abs() < 1e-6);
    }

    #[test]
    fn fp_root_examples() {
        let s = [0.3, -1.2, 4.0, 2.5];
        assert_eq!(fp_root(2, &s, ROOT_TOL).unwrap(), 5.6 / 4.0);
        assert_eq!(fp_root(4, &[-1.0, 1.0], ROOT_TOL).unwrap(), 0.0);
        // 2x^3 + (x - 3)^3 = 0 has the single real root 3 / (1 + 2^{1/3})
        let r = fp_root(4, &[0.0, 0.0, 3.0], ROOT_TOL).unwrap();
        assert_abs_diff_eq!(r, 1.327_480_002_073_326, epsilon = 1e-12);
        assert_eq!(fp_root(6, &[2.0, 2.0, 2.0], ROOT_TOL).unwrap(), 2.0);
        assert!(matches!(fp_root(3, &s, ROOT_TOL), Err(Error::InvalidExponent(3))));
        assert!(matches!(fp_root(0, &s, ROOT_TOL), Err(Error::InvalidExponent(0))));
        assert!(matches!(fp_root(4, &[], ROOT_TOL), Err(Error::EmptySample)));
    }

    #[test]
    fn transversality_examples() {
        let s: Vec<f64> = (0..50).map(|i| (i as f64 * 0.37).sin()).collect();
        let mean = fp_root(2, &s, ROOT_TOL).unwrap();
        assert!(transversality_residual(2, &s, mean).unwrap().abs() < 1e-15);
        assert_abs_diff_eq!(
            transversality_residual(2, &s, mean + 1.0).unwrap(),
            1.0,
            epsilon = 1e-14
        );
        let r4 = fp_root(4, &s, ROOT_TOL).unwrap();
        let slope = 3.0 * s.iter().map(|z| (r4 - z).powi(2)).sum::<f64>() / s.len() as f64;
        assert!(transversality_residual(4, &s, r4).unwrap().abs() <= ROOT_TOL * slope + 1e-15);
        assert!(transversality_residual(5, &s, 0.0).is_err());
    }

    #[test]
    fn bisection_rejects_unbracketed() {
        assert!(matches!(
            bisect_increasing(|x| x - 5.0, 0.0, 1.0, 1e-12),
            Err(Error::NotBracketed { .. })
        ));
    }

    #[test]
    fn f2_examples() {
        let g = TimeGrid::new(5.0, 1e-3).unwrap();
        let ss = f2_analytic(&DriftModel::SingleShot { lambda: 2.0 }, 1.5, &g).unwrap();
        assert_abs_diff_eq!(ss.accumulated.at(1.0), 0.342_323_472_744_079_2, epsilon = 1e-12);
        assert_eq!(ss.accumulated.first(), 0.0);
        let ou = f2_analytic(
            &DriftModel::OuDrift {
                lambda: 2.0,
                sigma_u: 1.0,
                u0: 1.0,
            },
            1.5,
            &g,
        )
        .unwrap();
        assert_abs_diff_eq!(ou.accumulated.at(1.0), 0.175_589_753_823_634_3, epsilon = 1e-12);
        let f0 = Curve::from_fn(g, |t| (2.0 * t).sin()).unwrap();
        let det = f2_analytic(&DriftModel::Deterministic { f: f0.clone() }, 1.5, &g).unwrap();
        assert_eq!(det.drift, f0);
        assert_eq!(det.accumulated, apply_i(&f0, 1.5).unwrap());
        // the recovered drift agrees with the analytic one
        let rec = apply_i_inv(&ss.accumulated, 1.5).unwrap();
        assert!(rec.sup_distance(&ss.drift).unwrap() < 1e-4);
    }

    #[test]
    fn eta2_is_slope_of_f2() {
        let g = TimeGrid::new(5.0, 1e-3).unwrap();
        let m = DriftModel::SingleShot { lambda: 2.0 };
        let eta = eta2(&m, 1.5, &g).unwrap();
        assert_eq!(eta.first(), 0.0);
        let f2 = mean_accumulated(&m, 1.5, &g).unwrap();
        // F' = I^{-1}F - θF
        let slope = apply_i_inv(&f2, 1.5)
            .unwrap()
            .zip_with(&f2, |a, b| a - 1.5 * b)
            .unwrap();
        assert!(slope.sup_distance(&eta).unwrap() < 1e-4);
        let f0 = Curve::from_fn(g, |t| 1.0 + t).unwrap();
        let det = eta2(&DriftModel::Deterministic { f: f0.clone() }, 1.5, &g).unwrap();
        let expected = apply_i(&f0, 1.5).unwrap().zip_with(&f0, |a, b| -1.5 * a + b).unwrap();
        assert_eq!(det, expected);
    }

    #[test]
    fn deterministic_moments_give_exact_curves() {
        let g = TimeGrid::new(2.0, 1e-2).unwrap();
        let f0 = Curve::from_fn(g, |t| (t * 3.0).cos() + 0.5).unwrap();
        let m = DriftModel::Deterministic { f: f0.clone() };
        let mc = accumulated_moments_mc(&m, 1.5, &g, 50, 3).unwrap();
        let exact = apply_i(&f0, 1.5).unwrap();
        assert_eq!(mc.m1, exact);
        for k in 0..g.len() {
            let a = exact.values()[k];
            assert_eq!(mc.m2.values()[k], a * a);
            assert_eq!(mc.m3.values()[k], a * a * a);
        }
        let f4 = f4_from_moments(&mc, 1.5, ROOT_TOL).unwrap();
        assert_eq!(f4.accumulated, exact);
    }

    #[test]
    fn gaussian_moments_make_f4_equal_f2() {
        let g = TimeGrid::new(5.0, 1e-3).unwrap();
        let (theta, lambda, sigma_u) = (1.5, 2.0, 1.0);
        let m = DriftModel::OuDrift {
            lambda,
            sigma_u,
            u0: 1.0,
        };
        let f2 = f2_analytic(&m, theta, &g).unwrap();
        // Var Z(t) = σ_U^2 ∫_0^t k(λ, θ, u)^2 du with k the OU-to-OU response
        let kern: Vec<f64> = (0..g.len())
            .map(|k| (sigma_u * exp_diff_ratio(lambda, theta, g.t(k))).powi(2))
            .collect();
        let var: Vec<f64> = (0..g.len()).map(|k| trapezoid_slice(&kern[..=k], g.dt())).collect();
        let var = Curve::new(g, var).unwrap();
        let mc = MomentCurves::gaussian(&f2.accumulated, &var).unwrap();
        mc.validate().unwrap();
        let f4 = f4_from_moments(&mc, theta, ROOT_TOL).unwrap();
        assert!(f4.accumulated.sup_distance(&f2.accumulated).unwrap() < 1e-10);
        assert_eq!(f4.accumulated.first(), 0.0);
    }

    #[test]
    fn single_shot_f4_differs_from_f2_stably() {
        let g = TimeGrid::new(5.0, 1e-3).unwrap();
        let m = DriftModel::SingleShot { lambda: 2.0 };
        let f2 = f2_analytic(&m, 1.5, &g).unwrap();
        let mut curves = Vec::new();
        for seed in [1, 2] {
            let mc = accumulated_moments_mc(&m, 1.5, &g, 10_000, seed).unwrap();
            let f4 = f4_from_moments(&mc, 1.5, ROOT_TOL).unwrap();
            assert_eq!(f4.accumulated.first(), 0.0);
            let gap = (0..g.len())
                .filter(|&k| {
                    let d = (f4.accumulated.values()[k] - f2.accumulated.values()[k]).abs();
                    d > 10.0 * mc.se1.values()[k]
                })
                .count();
            assert!(gap > 100, "seed {seed}: only {gap} separated nodes");
            curves.push(f4.accumulated);
        }
        assert!(curves[0].sup_distance(&curves[1]).unwrap() < 0.05);
    }

    #[test]
    fn cubic_agrees_with_sample_root() {
        let mut s = derive_stream(8, 0);
        for _ in 0..20 {
            let xs: Vec<f64> = (0..200).map(|_| s.random::<f64>().powi(3) * 4.0 - 0.5).collect();
            let n = xs.len() as f64;
            let m1 = xs.iter().sum::<f64>() / n;
            let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n;
            let m3 = xs.iter().map(|x| x * x * x).sum::<f64>() / n;
            let a = cubic_el_root(m1, m2, m3, ROOT_TOL).unwrap();
            let b = fp_root(4, &xs, ROOT_TOL).unwrap();
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn moment_curves_invariants_on_small_ensemble() {
        let g = TimeGrid::new(1.0, 0.1).unwrap();
        let m = DriftModel::CompoundPoisson {
            lambda: 2.0,
            jump: Distribution::Exponential { rate: 2.0 },
        };
        let e = PathEnsemble::generate(g, 30, crate::timebase::StreamKey::new(1), |mut r| {
            crate::drift::sample_accumulated_path(&m, 1.5, &g, &mut r).unwrap()
        })
        .unwrap();
        let mc = MomentCurves::from_source(&e).unwrap();
        mc.validate().unwrap();
        let col = e.column(7);
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        assert_abs_diff_eq!(mc.m1.values()[7], mean, epsilon = 1e-13);
        let m2 = col.iter().map(|x| x * x).sum::<f64>() / n;
        assert_abs_diff_eq!(mc.m2.values()[7], m2, epsilon = 1e-12);
        let m3 = col.iter().map(|x| x * x * x).sum::<f64>() / n;
        assert_abs_diff_eq!(mc.m3.values()[7], m3, epsilon = 1e-12);
        let _ = var_z(&m, &g).unwrap();
    }

    #[test]
    fn approximant_csv() {
        let g = TimeGrid::new(1.0, 0.25).unwrap();
        let a = Approximant::from_curve(2, Curve::from_fn(g, |t| t * t).unwrap(), 1.0).unwrap();
        let mut buf = Vec::new();
        a.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("t,F,f\n"));
        assert_eq!(text.lines().count(), 6);
    }

    proptest! {
        #[test]
        fn cubic_scale_equivariance(m1 in -3.0..3.0f64, c2 in 0.0..4.0f64, c3 in -8.0..8.0f64, c in 0.1..10.0f64) {
            let m2 = m1 * m1 + c2;
            let m3 = m1 * m1 * m1 + 3.0 * m1 * c2 + c3;
            let r = cubic_el_root(m1, m2, m3, ROOT_TOL).unwrap();
            let rc = cubic_el_root(c * m1, c * c * m2, c * c * c * m3, ROOT_TOL).unwrap();
            prop_assert!((rc - c * r).abs() < 1e-10 * (1.0 + c * (m1.abs() + c2.sqrt() + c3.abs().cbrt())), "{rc} vs {}", c * r);
        }

        #[test]
        fn cubic_root_is_the_unique_sign_change(m1 in -3.0..3.0f64, c2 in 0.0..4.0f64, c3 in -8.0..8.0f64, dx in 1e-6..2.0f64) {
            let m2 = m1 * m1 + c2;
            let m3 = m1 * m1 * m1 + 3.0 * m1 * c2 + c3;
            let r = cubic_el_root(m1, m2, m3, ROOT_TOL).unwrap();
            let g = |x: f64| { let y = x - m1; y * (y * y + 3.0 * c2) - c3 };
            prop_assert!(g(r - dx) < 0.0);
            prop_assert!(g(r + dx) > 0.0);
        }

        #[test]
        fn sample_mean_minimizes_squared_deviation(xs in proptest::collection::vec(-10.0..10.0f64, 1..40)) {
            let m = fp_root(2, &xs, ROOT_TOL).unwrap();
            let msd = |c: f64| xs.iter().map(|x| (x - c).powi(2)).sum::<f64>();
            prop_assert!(msd(m) <= msd(m + 0.1));
            prop_assert!(msd(m) <= msd(m - 0.1));
        }
    }
}
