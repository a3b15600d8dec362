use rand::Rng;
use rand_distr::{Distribution as _, Exp, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Scalar distributions used for jump sizes, amplitudes, arrival times and
/// shot counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Distribution {
    Exponential {
        rate: f64,
    },
    Gamma {
        rate: f64,
        shape: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    #[serde(rename = "poisson")]
    PoissonCount {
        mean: f64,
    },
    #[serde(rename = "fixed")]
    FixedCount {
        value: u64,
    },
    PointMass {
        value: f64,
    },
}

fn positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be positive, got {v}")))
    }
}

impl Distribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Distribution::Exponential { rate } => positive("rate", rate),
            Distribution::Gamma { rate, shape } => {
                positive("rate", rate)?;
                positive("shape", shape)
            }
            Distribution::Uniform { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi {
                    Ok(())
                } else {
                    Err(Error::param("uniform", format!("need lo < hi, got [{lo}, {hi}]")))
                }
            }
            Distribution::PoissonCount { mean } => positive("mean", mean),
            Distribution::FixedCount { .. } => Ok(()),
            Distribution::PointMass { value } => {
                if value.is_finite() {
                    Ok(())
                } else {
                    Err(Error::param("value", "must be finite"))
                }
            }
        }
    }

    pub fn is_count(&self) -> bool {
        matches!(
            self,
            Distribution::PoissonCount { .. } | Distribution::FixedCount { .. }
        )
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Distribution::Exponential { rate } => 1.0 / rate,
            Distribution::Gamma { rate, shape } => shape / rate,
            Distribution::Uniform { lo, hi } => 0.5 * (lo + hi),
            Distribution::PoissonCount { mean } => mean,
            Distribution::FixedCount { value } => value as f64,
            Distribution::PointMass { value } => value,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Distribution::Exponential { rate } => 1.0 / (rate * rate),
            Distribution::Gamma { rate, shape } => shape / (rate * rate),
            Distribution::Uniform { lo, hi } => (hi - lo).powi(2) / 12.0,
            Distribution::PoissonCount { mean } => mean,
            Distribution::FixedCount { .. } | Distribution::PointMass { .. } => 0.0,
        }
    }

    /// `E[X^2]`.
    pub fn second_moment(&self) -> f64 {
        self.variance() + self.mean().powi(2)
    }

    /// `E[X^4]`; finite for every parameterized family here, but checked
    /// anyway before fourth-power costs are requested.
    pub fn fourth_moment(&self) -> f64 {
        match *self {
            Distribution::Exponential { rate } => 24.0 / rate.powi(4),
            Distribution::Gamma { rate, shape } => shape * (shape + 1.0) * (shape + 2.0) * (shape + 3.0) / rate.powi(4),
            Distribution::Uniform { lo, hi } => (hi.powi(5) - lo.powi(5)) / (5.0 * (hi - lo)),
            Distribution::PoissonCount { mean: m } => m.powi(4) + 6.0 * m.powi(3) + 7.0 * m * m + m,
            Distribution::FixedCount { value } => (value as f64).powi(4),
            Distribution::PointMass { value } => value.powi(4),
        }
    }

    /// Probability density at `x`; `None` for discrete laws.
    pub fn density(&self, x: f64) -> Option<f64> {
        match *self {
            Distribution::Exponential { rate } => Some(if x < 0.0 { 0.0 } else { rate * (-rate * x).exp() }),
            Distribution::Gamma { rate, shape } => Some(if x < 0.0 {
                0.0
            } else if x == 0.0 {
                if shape < 1.0 {
                    f64::INFINITY
                } else if shape == 1.0 {
                    rate
                } else {
                    0.0
                }
            } else {
                (shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - ln_gamma(shape)).exp()
            }),
            Distribution::Uniform { lo, hi } => Some(if x < lo || x > hi { 0.0 } else { 1.0 / (hi - lo) }),
            _ => None,
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Distribution::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            Distribution::Gamma { rate, shape } => Gamma::new(shape, 1.0 / rate).expect("validated gamma").sample(rng),
            Distribution::Uniform { lo, hi } => rng.random_range(lo..hi),
            Distribution::PoissonCount { mean } => Poisson::new(mean).expect("validated mean").sample(rng),
            Distribution::FixedCount { value } => value as f64,
            Distribution::PointMass { value } => value,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Distribution::Exponential { rate } => format!("Exp(rate={rate})"),
            Distribution::Gamma { rate, shape } => format!("Gamma(rate={rate}, shape={shape})"),
            Distribution::Uniform { lo, hi } => format!("U({lo}, {hi})"),
            Distribution::PoissonCount { mean } => format!("Poisson({mean})"),
            Distribution::FixedCount { value } => format!("Fixed({value})"),
            Distribution::PointMass { value } => format!("Delta({value})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::timebase::derive_stream;

    #[test]
    fn validation() {
        assert!(Distribution::Exponential { rate: 0.0 }.validate().is_err());
        assert!(Distribution::Gamma { rate: 1.0, shape: -1.0 }.validate().is_err());
        assert!(Distribution::Uniform { lo: 1.0, hi: 1.0 }.validate().is_err());
        assert!(Distribution::PoissonCount { mean: 0.0 }.validate().is_err());
        assert!(Distribution::Uniform { lo: 0.5, hi: 1.5 }.validate().is_ok());
    }

    #[test]
    fn sample_moments_match_formulas() {
        let dists = [
            Distribution::Exponential { rate: 2.0 },
            Distribution::Gamma {
                rate: 1.0 / 15.0,
                shape: 2.0,
            },
            Distribution::Uniform { lo: 0.5, hi: 1.5 },
            Distribution::PoissonCount { mean: 3.0 },
        ];
        let n = 20_000;
        for (j, d) in dists.iter().enumerate() {
            let mut s = derive_stream(11, j as u64);
            let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut s)).collect();
            let m = xs.iter().sum::<f64>() / n as f64;
            let m2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
            let se = (d.variance() / n as f64).sqrt();
            assert!((m - d.mean()).abs() < 4.0 * se, "{d:?}: mean {m}");
            let se2 = ((d.fourth_moment() - d.second_moment().powi(2)) / n as f64).sqrt();
            assert!((m2 - d.second_moment()).abs() < 4.0 * se2, "{d:?}: m2 {m2}");
        }
    }

    #[test]
    fn densities_integrate_to_one() {
        for d in [
            Distribution::Exponential { rate: 0.5 },
            Distribution::Gamma { rate: 2.0, shape: 3.0 },
            Distribution::Uniform { lo: 1.0, hi: 3.0 },
        ] {
            let h = 1e-3;
            let total: f64 = (0..60_000).map(|k| d.density((k as f64 + 0.5) * h).unwrap() * h).sum();
            assert!((total - 1.0).abs() < 1e-4, "{d:?}: {total}");
        }
        assert!(Distribution::FixedCount { value: 3 }.density(1.0).is_none());
    }

    #[test]
    fn serde_tags() {
        let d: Distribution = serde_json::from_str(r#"{"type":"fixed","value":10}"#).unwrap();
        assert_eq!(d, Distribution::FixedCount { value: 10 });
        let d: Distribution = serde_json::from_str(r#"{"type":"uniform","lo":0.5,"hi":1.5}"#).unwrap();
        assert_eq!(d, Distribution::Uniform { lo: 0.5, hi: 1.5 });
    }
}
