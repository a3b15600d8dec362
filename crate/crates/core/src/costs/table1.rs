use serde::{Deserialize, Serialize};

use super::{evaluate_pair, CostReport};
use crate::approx::{f2_analytic, f4_from_moments, MomentCurves, ROOT_TOL};
use crate::drift::{Distribution, DriftModel, DriftPaths};
use crate::error::Result;
use crate::timebase::{StreamKey, TimeGrid, DRIFT_LANE, FIT_LANE};

/// Parameters of the five-model cost comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Table1Config {
    pub theta: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub x0: f64,
    pub u0: f64,
    pub sigma_u: f64,
    pub jump_rate: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub dt: f64,
    pub n_paths: usize,
}

impl Default for Table1Config {
    fn default() -> Self {
        Table1Config {
            theta: 1.5,
            lambda: 2.0,
            sigma: 1.0,
            x0: 0.0,
            u0: 1.0,
            sigma_u: 1.0,
            jump_rate: 2.0,
            horizon: 5.0,
            dt: 1e-3,
            n_paths: 10_000,
        }
    }
}

impl Table1Config {
    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.horizon, self.dt)
    }

    /// Scenario labels with their drift models, in table order.
    pub fn scenarios(&self) -> Vec<(&'static str, DriftModel)> {
        let l = self.lambda;
        vec![
            ("single_shot", DriftModel::SingleShot { lambda: l }),
            ("poisson", DriftModel::Poisson { lambda: l }),
            (
                "compound_poisson",
                DriftModel::CompoundPoisson {
                    lambda: l,
                    jump: Distribution::Exponential { rate: self.jump_rate },
                },
            ),
            ("brownian_drift", DriftModel::BrownianDrift { lambda: l }),
            (
                "ou_drift",
                DriftModel::OuDrift {
                    lambda: l,
                    sigma_u: self.sigma_u,
                    u0: self.u0,
                },
            ),
        ]
    }
}

/// Ensemble keys for fitting moments and for evaluating costs. Distinct
/// lanes, so the fitted `F_4` never sees the paths it is scored on.
pub(crate) fn ensemble_keys(seed: u64) -> (StreamKey, StreamKey) {
    let root = StreamKey::new(seed);
    (root.lane(FIT_LANE), root.lane(DRIFT_LANE))
}

/// For every model: `F_2` in closed form, `F_4` from the moments of a fitting
/// ensemble, then `J_2` and `J_4` of both on an independent evaluation
/// ensemble.
pub fn run_table1(cfg: &Table1Config, seed: u64) -> Result<CostReport> {
    let grid = cfg.grid()?;
    let (fit, eval) = ensemble_keys(seed);
    let mut scenarios = Vec::new();
    for (name, model) in cfg.scenarios() {
        log::info!("table 1: {name}");
        let f2 = f2_analytic(&model, cfg.theta, &grid)?;
        let fitting = DriftPaths::with_key(model.clone(), cfg.theta, grid, cfg.n_paths, fit)?;
        let moments = MomentCurves::from_source(&fitting)?;
        let f4 = f4_from_moments(&moments, cfg.theta, ROOT_TOL)?;
        let scoring = DriftPaths::with_key(model, cfg.theta, grid, cfg.n_paths, eval)?;
        scenarios.push(evaluate_pair(name, &scoring, &f2.accumulated, &f4.accumulated)?);
    }
    Ok(CostReport {
        symbol: "X".into(),
        n_paths: cfg.n_paths,
        seed,
        dt: cfg.dt,
        horizon: cfg.horizon,
        scenarios,
        config_echo: serde_json::json!({ "table1": cfg, "seed": seed }),
    })
}
