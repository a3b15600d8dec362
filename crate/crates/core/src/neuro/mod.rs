//! An embedded neuron driven by the first firing times of a layer of `M`
//! independent LIF input neurons. Each input fires once at `T_j` and adds the
//! shot `β_j e^{-λ(t - T_j)}` to the drift of the embedded membrane
//! potential `dV = (-θV + z) dt + σ dW`. Units are ms and mV.

mod lif;
mod shot;
mod table2;

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

pub use lif::{first_passage_time, LifNeuron, Passage};
pub use shot::{partial_mgf, phi_psi, shot_mean_accumulated};
pub use table2::{run_table2, Table2Config, Table2Outcome};

pub use crate::special::lower_incomplete_gamma;

use crate::approx::Approximant;
use crate::drift::{Distribution, DriftModel, DriftRealization};
use crate::error::{Error, Result};
use crate::sde::LinearSDE;
use crate::special::exp_diff_ratio;
use crate::timebase::{Curve, PathSource, RandomStream, StreamKey, TimeGrid};

/// Substream tag of input neuron `j` is `INPUT_LANE_BASE + j`.
const INPUT_LANE_BASE: u64 = 100;

/// Where the input firing times come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FiringTimes {
    /// Independent draws from a given law.
    Analytic { distribution: Distribution },
    /// First passage times of simulated LIF neurons; inputs that have not
    /// fired by `horizon_cap` contribute nothing.
    Simulated {
        neuron: LifNeuron,
        #[serde(default = "default_cap")]
        horizon_cap: f64,
        #[serde(default = "default_fpt_dt")]
        dt: f64,
    },
}

fn default_cap() -> f64 {
    100.0
}

fn default_fpt_dt() -> f64 {
    1e-2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddedNeuronModel {
    pub theta: f64,
    pub sigma: f64,
    pub v0: f64,
    /// Decay rate of the response to one input spike.
    pub response_rate: f64,
    pub amplitude: Distribution,
    pub inputs: u64,
    pub firing: FiringTimes,
}

impl EmbeddedNeuronModel {
    pub fn validate(&self) -> Result<()> {
        if self.inputs == 0 {
            return Err(Error::param("inputs", "need at least one input neuron"));
        }
        self.amplitude.validate()?;
        if self.amplitude.is_count() {
            return Err(Error::UnsupportedDistribution {
                context: "shot amplitude",
                dist: self.amplitude.label(),
            });
        }
        match &self.firing {
            FiringTimes::Analytic { .. } => {
                self.drift_model().expect("analytic").validate()?;
            }
            FiringTimes::Simulated {
                neuron,
                horizon_cap,
                dt,
            } => {
                neuron.validate()?;
                if !(horizon_cap.is_finite() && *horizon_cap > 0.0) {
                    return Err(Error::param("horizon_cap", "must be positive"));
                }
                if !(dt.is_finite() && *dt > 0.0) {
                    return Err(Error::param("dt", "must be positive"));
                }
            }
        }
        if !(self.response_rate.is_finite() && self.response_rate > 0.0) {
            return Err(Error::param("response_rate", "must be positive"));
        }
        if (self.response_rate - self.theta).abs() <= 1e-12 * self.theta.abs().max(self.response_rate) {
            return Err(Error::Coincidence(format!("response_rate = theta = {}", self.theta)));
        }
        Ok(())
    }

    pub fn sde(&self, grid: TimeGrid) -> Result<LinearSDE> {
        LinearSDE::new(self.theta, self.sigma, self.v0, grid)
    }

    /// The equivalent shot-noise drift model when the firing-time law is
    /// known.
    pub fn drift_model(&self) -> Option<DriftModel> {
        match &self.firing {
            FiringTimes::Analytic { distribution } => Some(DriftModel::ShotNoise {
                count: Distribution::FixedCount { value: self.inputs },
                amplitude: self.amplitude.clone(),
                arrival: distribution.clone(),
                response_rate: self.response_rate,
            }),
            FiringTimes::Simulated { .. } => None,
        }
    }
}

/// One trial of the input layer.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkDraw {
    pub realization: DriftRealization,
    /// Inputs that never fired before the cap and were dropped.
    pub censored: u64,
}

/// Draws the firing times and amplitudes of one trial. Amplitudes come from
/// `stream`; simulated input `j` runs on its own substream.
pub fn build_drift_from_network(
    model: &EmbeddedNeuronModel,
    grid: &TimeGrid,
    stream: &mut RandomStream,
) -> Result<NetworkDraw> {
    model.validate()?;
    match &model.firing {
        FiringTimes::Analytic { .. } => {
            let dm = model.drift_model().expect("analytic");
            Ok(NetworkDraw {
                realization: DriftRealization::draw(&dm, grid, stream),
                censored: 0,
            })
        }
        FiringTimes::Simulated {
            neuron,
            horizon_cap,
            dt,
        } => {
            let m = model.inputs as usize;
            let amplitudes: Vec<f64> = (0..m).map(|_| model.amplitude.sample(stream)).collect();
            let mut times = Vec::with_capacity(m);
            let mut kept = Vec::with_capacity(m);
            let mut censored = 0;
            for (j, &beta) in amplitudes.iter().enumerate() {
                let mut sub = stream.substream(INPUT_LANE_BASE + j as u64);
                match first_passage_time(neuron, *dt, *horizon_cap, &mut sub)? {
                    Passage::Fired(t) => {
                        times.push(t);
                        kept.push(beta);
                    }
                    Passage::Censored => censored += 1,
                }
            }
            Ok(NetworkDraw {
                realization: DriftRealization::shots(times, kept, model.response_rate),
                censored,
            })
        }
    }
}

/// Lazily simulated ensemble of accumulated network drifts `Z`. Trial `i`
/// reads stream `i` of `key`. Censoring is tallied once per trial, however
/// often the ensemble is walked.
#[derive(Debug)]
pub struct NetworkPaths {
    model: EmbeddedNeuronModel,
    grid: TimeGrid,
    n_paths: usize,
    key: StreamKey,
    censored: AtomicU64,
    drawn: AtomicU64,
    seen: Vec<AtomicBool>,
}

impl NetworkPaths {
    pub fn new(model: EmbeddedNeuronModel, grid: TimeGrid, n_paths: usize, key: StreamKey) -> Result<Self> {
        model.validate()?;
        if n_paths == 0 {
            return Err(Error::param("n_paths", "must be positive"));
        }
        Ok(NetworkPaths {
            model,
            grid,
            n_paths,
            key,
            censored: AtomicU64::new(0),
            drawn: AtomicU64::new(0),
            seen: (0..n_paths).map(|_| AtomicBool::new(false)).collect(),
        })
    }

    /// `(censored inputs, simulated inputs)` over the trials visited so far.
    pub fn censoring(&self) -> (u64, u64) {
        (
            self.censored.load(Ordering::Relaxed),
            self.drawn.load(Ordering::Relaxed),
        )
    }

    pub fn censored_fraction(&self) -> f64 {
        let (c, d) = self.censoring();
        if d == 0 {
            0.0
        } else {
            c as f64 / d as f64
        }
    }

    pub fn draw(&self, i: usize) -> Result<NetworkDraw> {
        build_drift_from_network(&self.model, &self.grid, &mut self.key.stream(i as u64))
    }
}

impl PathSource for NetworkPaths {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn n_paths(&self) -> usize {
        self.n_paths
    }

    fn with_path<R>(&self, i: usize, f: impl FnOnce(&[f64]) -> R) -> R {
        let d = self.draw(i).expect("validated at construction");
        if !self.seen[i].swap(true, Ordering::Relaxed) {
            self.censored.fetch_add(d.censored, Ordering::Relaxed);
            self.drawn.fetch_add(self.model.inputs, Ordering::Relaxed);
        }
        f(&d.realization.accumulated_values(self.model.theta, &self.grid))
    }
}

/// Closed-form `F_2` and `f_2 = M E[β] φ` for exponential firing times.
pub fn v2_exponential(model: &EmbeddedNeuronModel, grid: &TimeGrid) -> Result<Approximant> {
    model.validate()?;
    let nu = match &model.firing {
        FiringTimes::Analytic {
            distribution: Distribution::Exponential { rate },
        } => *rate,
        _ => {
            return Err(Error::NoClosedForm(
                "the explicit approximant needs exponential firing times".into(),
            ))
        }
    };
    let (lambda, theta) = (model.response_rate, model.theta);
    for (other, name) in [(lambda, "response_rate"), (theta, "theta")] {
        if (nu - other).abs() <= 1e-12 * nu.max(other) {
            return Err(Error::Coincidence(format!("firing rate = {name} = {nu}")));
        }
    }
    let scale = model.inputs as f64 * model.amplitude.mean();
    let big = Curve::from_fn(*grid, |t| {
        scale * nu / (nu - lambda) * (exp_diff_ratio(lambda, theta, t) - exp_diff_ratio(nu, theta, t))
    })?;
    let small = Curve::from_fn(*grid, |t| scale * nu * exp_diff_ratio(lambda, nu, t))?;
    Approximant::from_parts(2, big, small, theta)
}
