//! The mean-square error bound
//! `E|Z(t) - F_2(t)|^2 = Var Z(t) <= e^{-2θt} ∫_0^t Var z(s) e^{2θs} ds =: d_2(t)`
//! and the Monte Carlo pointwise error it dominates.

use std::io::{self, Write};

use serde::Serialize;

use crate::drift::{var_z, Distribution, DriftModel};
use crate::error::{Error, Result};
use crate::neuro::phi_psi;
use crate::special::exp_diff_ratio;
use crate::timebase::{exp_weighted_running_integral, fmt_f64, fold_paths, trapezoid, Curve, PathSource, TimeGrid};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCurve {
    pub grid: TimeGrid,
    pub d2: Curve,
    /// `∫_0^T d_2(t) dt`
    pub l1_mass: f64,
    /// False when part of the curve came from quadrature.
    pub closed_form: bool,
}

impl BoundCurve {
    fn new(d2: Curve, closed_form: bool) -> Result<Self> {
        let d2 = d2.map(|v| v.max(0.0))?;
        Ok(BoundCurve {
            grid: *d2.grid(),
            l1_mass: trapezoid(&d2),
            d2,
            closed_form,
        })
    }
}

/// `d_2` as the `2θ`-weighted running integral of the drift variance.
pub fn d2_generic(model: &DriftModel, theta: f64, grid: &TimeGrid) -> Result<BoundCurve> {
    model.check_pairing(theta)?;
    let v = var_z(model, grid)?;
    BoundCurve::new(exp_weighted_running_integral(&v, 2.0 * theta)?, false)
}

fn reject_coincidence(a: f64, b: f64, what: &str) -> Result<()> {
    if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) {
        return Err(Error::Coincidence(format!("{what} = {a}")));
    }
    Ok(())
}

/// Per-model closed forms of `d_2`. All are written through the stable
/// kernel `k(a, b, t) = (e^{-at} - e^{-bt}) / (b - a)`, which is the
/// `2θ`-weighted integral of `e^{-as}`.
pub fn d2_closed(model: &DriftModel, theta: f64, grid: &TimeGrid) -> Result<BoundCurve> {
    model.validate()?;
    model.check_pairing(theta)?;
    let two_theta = 2.0 * theta;
    // ∫_0^t e^{-2θ(t-s)} (1, s) ds
    let unit = move |t: f64| -(-two_theta * t).exp_m1() / two_theta;
    let ramp = move |t: f64| t / two_theta + (-two_theta * t).exp_m1() / (two_theta * two_theta);
    let k = |a: f64, t: f64| exp_diff_ratio(a, two_theta, t);
    let d2 = match model {
        DriftModel::SingleShot { lambda } => {
            reject_coincidence(*lambda, two_theta, "lambda = 2 theta")?;
            let l = *lambda;
            Curve::from_fn(*grid, |t| k(l, t) - k(2.0 * l, t))?
        }
        DriftModel::Poisson { lambda } => Curve::from_fn(*grid, |t| lambda * ramp(t))?,
        DriftModel::CompoundPoisson { lambda, jump } => {
            let c = lambda * jump.second_moment();
            Curve::from_fn(*grid, |t| c * ramp(t))?
        }
        DriftModel::BrownianDrift { .. } => Curve::from_fn(*grid, ramp)?,
        DriftModel::OuDrift { lambda, sigma_u, .. } => {
            let c = sigma_u * sigma_u / (2.0 * lambda);
            let l = *lambda;
            Curve::from_fn(*grid, |t| c * (unit(t) - k(2.0 * l, t)))?
        }
        DriftModel::ShotNoise {
            count,
            amplitude,
            arrival,
            response_rate,
        } => {
            let excess = count.variance() - count.mean();
            let (eb, eb2, em) = (amplitude.mean(), amplitude.second_moment(), count.mean());
            let l = *response_rate;
            match arrival {
                Distribution::Exponential { rate: nu } => {
                    let nu = *nu;
                    reject_coincidence(nu, l, "arrival rate = response_rate")?;
                    reject_coincidence(nu, 2.0 * l, "arrival rate = 2 response_rate")?;
                    // φ = ν k(λ, ν), Ψ = ν k(2λ, ν), expanded into single exponentials
                    let a = nu * nu / ((nu - l) * (nu - l));
                    let b = nu / (nu - 2.0 * l);
                    Curve::from_fn(*grid, |t| {
                        let phi_sq = a * (k(2.0 * l, t) - 2.0 * k(l + nu, t) + k(2.0 * nu, t));
                        let psi = b * (k(2.0 * l, t) - k(nu, t));
                        eb * eb * excess * phi_sq + em * eb2 * psi
                    })?
                }
                _ => {
                    let (phi, psi) = phi_psi(arrival, l, grid)?;
                    let a = exp_weighted_running_integral(&phi.map(|v| v * v)?, two_theta)?;
                    let b = exp_weighted_running_integral(&psi, two_theta)?;
                    let d2 = a.zip_with(&b, |x, y| eb * eb * excess * x + em * eb2 * y)?;
                    return BoundCurve::new(d2, false);
                }
            }
        }
        DriftModel::Deterministic { .. } => Curve::zeros(*grid),
    };
    BoundCurve::new(d2, true)
}

/// Per-node sample mean and standard error of `(Z_i(t) - F(t))^2`.
pub fn pointwise_mse<S: PathSource>(source: &S, curve: &Curve) -> Result<(Curve, Curve)> {
    if source.grid() != curve.grid() {
        return Err(Error::GridMismatch);
    }
    let n = source.n_paths();
    if n == 0 {
        return Err(Error::EmptySample);
    }
    let len = curve.len();
    let f = curve.values();
    let sums = fold_paths(source, 2 * len, |_, p, acc| {
        let (s1, s2) = acc.split_at_mut(len);
        for k in 0..len {
            let e = (p[k] - f[k]) * (p[k] - f[k]);
            s1[k] += e;
            s2[k] += e * e;
        }
    });
    let nf = n as f64;
    let mut mse = Vec::with_capacity(len);
    let mut se = Vec::with_capacity(len);
    for k in 0..len {
        let m = sums[k] / nf;
        mse.push(m);
        let var = if n > 1 {
            ((sums[len + k] - nf * m * m) / (nf - 1.0)).max(0.0)
        } else {
            0.0
        };
        se.push((var / nf).sqrt());
    }
    Ok((Curve::new(*curve.grid(), mse)?, Curve::new(*curve.grid(), se)?))
}

/// Simulated pointwise error against the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundComparison {
    pub mse: Curve,
    pub se: Curve,
    pub d2: Curve,
}

impl BoundComparison {
    pub fn new(mse: Curve, se: Curve, d2: Curve) -> Result<Self> {
        mse.check_same_grid(&se)?;
        mse.check_same_grid(&d2)?;
        Ok(BoundComparison { mse, se, d2 })
    }

    /// `max_t (mse - d2 - z se)`; non-positive when the bound holds at every
    /// node within `z` standard errors.
    pub fn max_violation(&self, z: f64) -> f64 {
        (0..self.mse.len())
            .map(|k| self.mse.values()[k] - self.d2.values()[k] - z * self.se.values()[k])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `t,mse,se,d2`
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,mse,se,d2")?;
        let g = self.mse.grid();
        for k in 0..g.len() {
            writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(g.t(k)),
                fmt_f64(self.mse.values()[k]),
                fmt_f64(self.se.values()[k]),
                fmt_f64(self.d2.values()[k])
            )?;
        }
        Ok(())
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn power_law_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
