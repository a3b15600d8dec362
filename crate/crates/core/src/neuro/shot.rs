use crate::drift::Distribution;
use crate::error::{Error, Result};
use crate::special::{exp_diff_ratio, regularized_lower_gamma};
use crate::timebase::{exp_weighted_running_integral, Curve, TimeGrid};

/// `∫_0^t p(u) e^{c u} du` for an arrival density `p`, where a closed form
/// exists: always for the exponential law, for the Gamma law only when
/// `rate > c`.
pub fn partial_mgf(arrival: &Distribution, c: f64, t: f64) -> Result<Option<f64>> {
    match *arrival {
        Distribution::Exponential { rate } => {
            let gap = rate - c;
            let integral = if gap == 0.0 { t } else { -(-gap * t).exp_m1() / gap };
            Ok(Some(rate * integral))
        }
        Distribution::Gamma { rate, shape } => {
            let gap = rate - c;
            if gap <= 0.0 {
                return Ok(None);
            }
            Ok(Some(
                (rate / gap).powf(shape) * regularized_lower_gamma(shape, gap * t)?,
            ))
        }
        _ => Err(unsupported(arrival)),
    }
}

fn unsupported(arrival: &Distribution) -> Error {
    Error::UnsupportedDistribution {
        context: "shot arrival time",
        dist: arrival.label(),
    }
}

/// `(R * p)(t) = ∫_0^t e^{-c (t-u)} p(u) du` by the trapezoid recursion on the
/// grid.
fn convolve_density(arrival: &Distribution, c: f64, grid: &TimeGrid) -> Result<Curve> {
    if let Distribution::Gamma { shape, .. } = arrival {
        if *shape < 1.0 {
            return Err(Error::NoClosedForm(format!(
                "{} has an unbounded density at 0; grid convolution is not available",
                arrival.label()
            )));
        }
    }
    let density = Curve::from_fn(*grid, |u| arrival.density(u).unwrap_or(0.0))?;
    exp_weighted_running_integral(&density, c)
}

fn response_convolution(arrival: &Distribution, c: f64, grid: &TimeGrid) -> Result<Curve> {
    match *arrival {
        Distribution::Exponential { rate } => Curve::from_fn(*grid, |t| rate * exp_diff_ratio(c, rate, t)),
        Distribution::Gamma { rate, .. } if rate > c => {
            let vals = (0..grid.len())
                .map(|k| {
                    let t = grid.t(k);
                    Ok((-c * t).exp() * partial_mgf(arrival, c, t)?.expect("rate > c"))
                })
                .collect::<Result<Vec<f64>>>()?;
            Curve::new(*grid, vals)
        }
        Distribution::Gamma { .. } => convolve_density(arrival, c, grid),
        _ => Err(unsupported(arrival)),
    }
}

/// `φ = R * p` and `Ψ = R^2 * p` for the response `R(t) = e^{-λt}` and an
/// exponential or Gamma arrival density `p`. Gamma cases whose closed form
/// would need the incomplete gamma at a negative argument are convolved on
/// the grid instead.
pub fn phi_psi(arrival: &Distribution, lambda: f64, grid: &TimeGrid) -> Result<(Curve, Curve)> {
    arrival.validate()?;
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    Ok((
        response_convolution(arrival, lambda, grid)?,
        response_convolution(arrival, 2.0 * lambda, grid)?,
    ))
}

/// `E[Z(t)]` per unit `E[M] E[β]` for shot noise with response rate `lambda`
/// feeding damping `theta`: `(e^{-λt} mgf(λ) - e^{-θt} mgf(θ)) / (θ - λ)`.
/// `None` when no closed form applies (Gamma arrivals with `rate <= max(λ, θ)`)
/// or the two rates are too close for the difference quotient.
pub fn shot_mean_accumulated(
    arrival: &Distribution,
    lambda: f64,
    theta: f64,
    grid: &TimeGrid,
) -> Result<Option<Curve>> {
    arrival.validate()?;
    if (theta - lambda).abs() < 1e-3 * theta.max(lambda) {
        return Ok(None);
    }
    match *arrival {
        Distribution::Exponential { rate } => {
            let curve = Curve::from_fn(*grid, |t| {
                rate * (exp_diff_ratio(lambda, rate, t) - exp_diff_ratio(theta, rate, t)) / (theta - lambda)
            })?;
            Ok(Some(curve))
        }
        Distribution::Gamma { rate, .. } => {
            if rate <= lambda.max(theta) {
                return Ok(None);
            }
            let vals = (0..grid.len())
                .map(|k| {
                    let t = grid.t(k);
                    let a = (-lambda * t).exp() * partial_mgf(arrival, lambda, t)?.expect("rate > lambda");
                    let b = (-theta * t).exp() * partial_mgf(arrival, theta, t)?.expect("rate > theta");
                    Ok((a - b) / (theta - lambda))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Some(Curve::new(*grid, vals)?))
        }
        _ => Err(unsupported(arrival)),
    }
}
