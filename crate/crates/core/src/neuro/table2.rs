use serde::{Deserialize, Serialize};

use super::{EmbeddedNeuronModel, FiringTimes, LifNeuron, NetworkPaths};
use crate::approx::{f2_analytic, f4_from_moments, Approximant, MomentCurves, ROOT_TOL};
use crate::costs::{evaluate_pair, CostReport, ScenarioCosts};
use crate::drift::{Distribution, DriftPaths};
use crate::error::{Error, Result};
use crate::timebase::{PathSource, StreamKey, TimeGrid, DRIFT_LANE, FIT_LANE};

/// Parameters of the embedded-neuron cost comparison (ms, mV).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Table2Config {
    pub theta: f64,
    pub sigma: f64,
    pub v0: f64,
    pub response_rate: f64,
    /// Rate of the exponential and Gamma firing-time laws.
    pub nu: f64,
    /// Shape of the Gamma firing-time law.
    pub shape: f64,
    pub inputs: u64,
    pub amplitude: Distribution,
    pub neuron: LifNeuron,
    pub horizon_cap: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
    /// Largest tolerated share of input neurons that never fire.
    pub max_censored_fraction: f64,
}

impl Default for Table2Config {
    fn default() -> Self {
        Table2Config {
            theta: 0.1,
            sigma: 1.0,
            v0: 0.0,
            response_rate: 1.0,
            nu: 1.0 / 15.0,
            shape: 2.0,
            inputs: 10,
            amplitude: Distribution::Uniform { lo: 0.5, hi: 1.5 },
            neuron: LifNeuron::default(),
            horizon_cap: 100.0,
            horizon: 50.0,
            dt: 1e-2,
            n_paths: 10_000,
            max_censored_fraction: 1e-3,
        }
    }
}

impl Table2Config {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.dt)
    }

    pub fn model(&self, firing: FiringTimes) -> EmbeddedNeuronModel {
        EmbeddedNeuronModel {
            theta: self.theta,
            sigma: self.sigma,
            v0: self.v0,
            response_rate: self.response_rate,
            amplitude: self.amplitude.clone(),
            inputs: self.inputs,
            firing,
        }
    }

    /// Scenario labels with their input layers, in table order.
    pub fn scenarios(&self) -> Vec<(&'static str, EmbeddedNeuronModel)> {
        vec![
            (
                "exponential",
                self.model(FiringTimes::Analytic {
                    distribution: Distribution::Exponential { rate: self.nu },
                }),
            ),
            (
                "gamma",
                self.model(FiringTimes::Analytic {
                    distribution: Distribution::Gamma {
                        rate: self.nu,
                        shape: self.shape,
                    },
                }),
            ),
            (
                "simulated_network",
                self.model(FiringTimes::Simulated {
                    neuron: self.neuron,
                    horizon_cap: self.horizon_cap,
                    dt: self.dt,
                }),
            ),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table2Outcome {
    pub report: CostReport,
    /// Input neurons that never fired in the simulated scenario.
    pub censored: u64,
    pub simulated_inputs: u64,
}

fn fit_and_score<S: PathSource>(
    name: &str,
    theta: f64,
    fitting: &S,
    scoring: &S,
    f2: Option<Approximant>,
) -> Result<ScenarioCosts> {
    let moments = MomentCurves::from_source(fitting)?;
    let f2 = match f2 {
        Some(a) => a,
        None => Approximant::from_curve(2, moments.m1.clone(), theta)?,
    };
    let f4 = f4_from_moments(&moments, theta, ROOT_TOL)?;
    evaluate_pair(name, scoring, &f2.accumulated, &f4.accumulated)
}

/// `J_2` and `J_4` of `F_2` and `F_4` for exponential, Gamma and simulated
/// LIF firing times. `F_2` is analytic for the first two and the sample mean
/// of the fitting ensemble for the simulated layer; `F_4` always comes from
/// fitting-ensemble moments. Costs are scored on an independent ensemble.
pub fn run_table2(cfg: &Table2Config, seed: u64) -> Result<Table2Outcome> {
    let grid = cfg.grid()?;
    let root = StreamKey::new(seed);
    let (fit, eval) = (root.lane(FIT_LANE), root.lane(DRIFT_LANE));
    let mut scenarios = Vec::new();
    let (mut censored, mut simulated_inputs) = (0, 0);
    for (name, model) in cfg.scenarios() {
        log::info!("table 2: {name}");
        model.validate()?;
        match model.drift_model() {
            Some(dm) => {
                let f2 = f2_analytic(&dm, cfg.theta, &grid)?;
                let fitting = DriftPaths::with_key(dm.clone(), cfg.theta, grid, cfg.n_paths, fit)?;
                let scoring = DriftPaths::with_key(dm, cfg.theta, grid, cfg.n_paths, eval)?;
                scenarios.push(fit_and_score(name, cfg.theta, &fitting, &scoring, Some(f2))?);
            }
            None => {
                let fitting = NetworkPaths::new(model.clone(), grid, cfg.n_paths, fit)?;
                let scoring = NetworkPaths::new(model, grid, cfg.n_paths, eval)?;
                scenarios.push(fit_and_score(name, cfg.theta, &fitting, &scoring, None)?);
                for p in [&fitting, &scoring] {
                    let (c, d) = p.censoring();
                    censored += c;
                    simulated_inputs += d;
                }
                let fraction = censored as f64 / simulated_inputs.max(1) as f64;
                log::info!("table 2: {censored} of {simulated_inputs} inputs censored");
                if fraction > cfg.max_censored_fraction {
                    return Err(Error::CensoringLimit(censored, simulated_inputs));
                }
            }
        }
    }
    Ok(Table2Outcome {
        report: CostReport {
            symbol: "V".into(),
            n_paths: cfg.n_paths,
            seed,
            dt: cfg.dt,
            horizon: cfg.horizon,
            scenarios,
            config_echo: serde_json::json!({ "table2": cfg, "seed": seed }),
        },
        censored,
        simulated_inputs,
    })
}
