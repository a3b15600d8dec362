//! Stochastic drift processes `z(t)` and their accumulated form
//! `Z(t) = e^{-θt} ∫_0^t z(s) e^{θs} ds`.

mod distribution;
mod realization;

use serde::{Deserialize, Serialize};

pub use distribution::Distribution;
pub use realization::{
    accumulated_moments_mc, sample_accumulated_path, sample_drift_path, DriftPaths, DriftRealization, PathKind,
};

use crate::error::{Error, Result};
use crate::neuro::{phi_psi, shot_mean_accumulated};
use crate::sde::apply_i;
use crate::special::exp_diff_ratio;
use crate::timebase::{Curve, TimeGrid};

/// The drift zoo. Every variant starts deterministically (`Z(0) = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum DriftModel {
    /// `z = 1{t >= T}` with `T ~ Exp(lambda)`.
    SingleShot { lambda: f64 },
    /// `z = N(t)`, a Poisson counting process of rate `lambda`.
    Poisson { lambda: f64 },
    /// `z = Σ_{i <= N(t)} J_i`.
    CompoundPoisson {
        lambda: f64,
        #[serde(default = "default_jump")]
        jump: Distribution,
    },
    /// `z = Σ_{i <= M} β_i e^{-λ_R (t - T_i)} 1{t >= T_i}`.
    ShotNoise {
        #[serde(default = "default_count")]
        count: Distribution,
        #[serde(default = "default_amplitude")]
        amplitude: Distribution,
        arrival: Distribution,
        response_rate: f64,
    },
    /// `z = W̃(t) + lambda t`.
    BrownianDrift { lambda: f64 },
    /// `dU = -lambda U dt + sigma_u dW̃`, `U(0) = u0`.
    OuDrift { lambda: f64, sigma_u: f64, u0: f64 },
    /// A plain deterministic drift; the approximation is then exact.
    Deterministic { f: Curve },
}

fn default_jump() -> Distribution {
    Distribution::Exponential { rate: 2.0 }
}

fn default_count() -> Distribution {
    Distribution::FixedCount { value: 10 }
}

fn default_amplitude() -> Distribution {
    Distribution::Uniform { lo: 0.5, hi: 1.5 }
}

fn rate(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

fn coincide(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl DriftModel {
    pub fn validate(&self) -> Result<()> {
        match self {
            DriftModel::SingleShot { lambda } | DriftModel::Poisson { lambda } => rate("lambda", *lambda),
            DriftModel::CompoundPoisson { lambda, jump } => {
                rate("lambda", *lambda)?;
                jump.validate()?;
                if jump.is_count() {
                    return Err(Error::UnsupportedDistribution {
                        context: "jump size",
                        dist: jump.label(),
                    });
                }
                Ok(())
            }
            DriftModel::ShotNoise {
                count,
                amplitude,
                arrival,
                response_rate,
            } => {
                rate("response_rate", *response_rate)?;
                count.validate()?;
                amplitude.validate()?;
                arrival.validate()?;
                if !count.is_count() {
                    return Err(Error::UnsupportedDistribution {
                        context: "shot count",
                        dist: count.label(),
                    });
                }
                if amplitude.is_count() {
                    return Err(Error::UnsupportedDistribution {
                        context: "shot amplitude",
                        dist: amplitude.label(),
                    });
                }
                if !matches!(arrival, Distribution::Exponential { .. } | Distribution::Gamma { .. }) {
                    return Err(Error::UnsupportedDistribution {
                        context: "shot arrival time",
                        dist: arrival.label(),
                    });
                }
                Ok(())
            }
            DriftModel::BrownianDrift { lambda } => {
                if lambda.is_finite() && *lambda >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::param("lambda", format!("must be non-negative, got {lambda}")))
                }
            }
            DriftModel::OuDrift { lambda, sigma_u, u0 } => {
                rate("lambda", *lambda)?;
                if !(sigma_u.is_finite() && *sigma_u >= 0.0) {
                    return Err(Error::param("sigma_u", format!("must be non-negative, got {sigma_u}")));
                }
                if !u0.is_finite() {
                    return Err(Error::param("u0", "must be finite"));
                }
                Ok(())
            }
            DriftModel::Deterministic { .. } => Ok(()),
        }
    }

    /// Parameter coincidences with the damping `theta` of the paired SDE.
    pub fn check_pairing(&self, theta: f64) -> Result<()> {
        rate("theta", theta)?;
        match self {
            DriftModel::SingleShot { lambda } | DriftModel::OuDrift { lambda, .. } if coincide(*lambda, theta) => {
                Err(Error::Coincidence(format!("lambda = theta = {theta}")))
            }
            DriftModel::ShotNoise { response_rate, .. } if coincide(*response_rate, theta) => {
                Err(Error::Coincidence(format!("response_rate = theta = {theta}")))
            }
            _ => Ok(()),
        }
    }

    /// Fourth-power costs need `E|z|^4 < ∞`.
    pub fn check_fourth_moment(&self) -> Result<()> {
        let dists: Vec<&Distribution> = match self {
            DriftModel::CompoundPoisson { jump, .. } => vec![jump],
            DriftModel::ShotNoise { count, amplitude, .. } => vec![count, amplitude],
            _ => vec![],
        };
        for d in dists {
            if !d.fourth_moment().is_finite() {
                return Err(Error::param(
                    "distribution",
                    format!("{} has no finite fourth moment", d.label()),
                ));
            }
        }
        Ok(())
    }

    fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if let DriftModel::Deterministic { f } = self {
            if f.grid() != grid {
                return Err(Error::GridMismatch);
            }
        }
        Ok(())
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(
            self,
            DriftModel::BrownianDrift { .. } | DriftModel::OuDrift { .. } | DriftModel::Deterministic { .. }
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            DriftModel::SingleShot { .. } => "single_shot",
            DriftModel::Poisson { .. } => "poisson",
            DriftModel::CompoundPoisson { .. } => "compound_poisson",
            DriftModel::ShotNoise { .. } => "shot_noise",
            DriftModel::BrownianDrift { .. } => "brownian_drift",
            DriftModel::OuDrift { .. } => "ou_drift",
            DriftModel::Deterministic { .. } => "deterministic",
        }
    }
}

/// `E[z(t)]` at the grid nodes.
pub fn mean_z(model: &DriftModel, grid: &TimeGrid) -> Result<Curve> {
    model.validate()?;
    model.check_grid(grid)?;
    match model {
        DriftModel::SingleShot { lambda } => Curve::from_fn(*grid, |t| -(-lambda * t).exp_m1()),
        DriftModel::Poisson { lambda } | DriftModel::BrownianDrift { lambda } => Curve::from_fn(*grid, |t| lambda * t),
        DriftModel::CompoundPoisson { lambda, jump } => {
            let m = jump.mean();
            Curve::from_fn(*grid, |t| lambda * t * m)
        }
        DriftModel::ShotNoise {
            count,
            amplitude,
            arrival,
            response_rate,
        } => {
            let (phi, _) = phi_psi(arrival, *response_rate, grid)?;
            phi.scale(count.mean() * amplitude.mean())
        }
        DriftModel::OuDrift { lambda, u0, .. } => Curve::from_fn(*grid, |t| u0 * (-lambda * t).exp()),
        DriftModel::Deterministic { f } => Ok(f.clone()),
    }
}

/// `D[z(t)] = Var z(t)` at the grid nodes.
pub fn var_z(model: &DriftModel, grid: &TimeGrid) -> Result<Curve> {
    model.validate()?;
    model.check_grid(grid)?;
    match model {
        DriftModel::SingleShot { lambda } => Curve::from_fn(*grid, |t| {
            let p = -(-lambda * t).exp_m1();
            p - p * p
        }),
        DriftModel::Poisson { lambda } => Curve::from_fn(*grid, |t| lambda * t),
        DriftModel::CompoundPoisson { lambda, jump } => {
            let m2 = jump.second_moment();
            Curve::from_fn(*grid, |t| lambda * t * m2)
        }
        DriftModel::ShotNoise {
            count,
            amplitude,
            arrival,
            response_rate,
        } => {
            let (phi, psi) = phi_psi(arrival, *response_rate, grid)?;
            let excess = count.variance() - count.mean();
            let (eb, eb2, em) = (amplitude.mean(), amplitude.second_moment(), count.mean());
            phi.zip_with(&psi, |f, p| eb * eb * f * f * excess + em * eb2 * p)
        }
        DriftModel::BrownianDrift { .. } => Curve::from_fn(*grid, |t| t),
        DriftModel::OuDrift { lambda, sigma_u, .. } => {
            let c = sigma_u * sigma_u / (2.0 * lambda);
            Curve::from_fn(*grid, |t| -c * (-2.0 * lambda * t).exp_m1())
        }
        DriftModel::Deterministic { .. } => Ok(Curve::zeros(*grid)),
    }
}

/// `E[Z(t)]`, closed form where one exists and `I(E[z])` by quadrature
/// otherwise.
pub fn mean_accumulated(model: &DriftModel, theta: f64, grid: &TimeGrid) -> Result<Curve> {
    model.validate()?;
    model.check_pairing(theta)?;
    model.check_grid(grid)?;
    let linear = |lambda: f64| move |t: f64| lambda * (t / theta + (-theta * t).exp_m1() / (theta * theta));
    match model {
        DriftModel::SingleShot { lambda } => Curve::from_fn(*grid, |t| {
            -(-theta * t).exp_m1() / theta - exp_diff_ratio(*lambda, theta, t)
        }),
        DriftModel::Poisson { lambda } | DriftModel::BrownianDrift { lambda } => Curve::from_fn(*grid, linear(*lambda)),
        DriftModel::CompoundPoisson { lambda, jump } => Curve::from_fn(*grid, linear(lambda * jump.mean())),
        DriftModel::OuDrift { lambda, u0, .. } => Curve::from_fn(*grid, |t| u0 * exp_diff_ratio(*lambda, theta, t)),
        DriftModel::ShotNoise {
            count,
            amplitude,
            arrival,
            response_rate,
        } => match shot_mean_accumulated(arrival, *response_rate, theta, grid)? {
            Some(unit) => unit.scale(count.mean() * amplitude.mean()),
            None => apply_i(&mean_z(model, grid)?, theta),
        },
        DriftModel::Deterministic { f } => apply_i(f, theta),
    }
}
