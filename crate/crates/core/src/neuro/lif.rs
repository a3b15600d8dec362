use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::timebase::RandomStream;

/// Leaky integrate-and-fire input neuron
/// `dV = (-θ_i V + μ_i) dt + σ_i dW`, `V(0) = v0`, firing at `V >= v_th`.
/// Units are ms and mV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LifNeuron {
    pub theta: f64,
    pub mu: f64,
    pub sigma: f64,
    pub v0: f64,
    pub v_th: f64,
}

impl Default for LifNeuron {
    fn default() -> Self {
        LifNeuron {
            theta: 0.1,
            mu: 6.0,
            sigma: 1.0,
            v0: 0.0,
            v_th: 20.0,
        }
    }
}

impl LifNeuron {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta.is_finite() && self.theta > 0.0) {
            return Err(Error::param("theta_i", format!("must be positive, got {}", self.theta)));
        }
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::param(
                "sigma_i",
                format!("must be non-negative, got {}", self.sigma),
            ));
        }
        if !self.mu.is_finite() {
            return Err(Error::param("mu_i", "must be finite"));
        }
        if !(self.v0.is_finite() && self.v_th.is_finite() && self.v_th > self.v0) {
            return Err(Error::param("v_th", "threshold must lie above the initial potential"));
        }
        Ok(())
    }

    /// Crossing time of the noiseless neuron, if it ever crosses.
    pub fn deterministic_crossing(&self) -> Option<f64> {
        let asymptote = self.mu / self.theta;
        if asymptote <= self.v_th {
            return None;
        }
        Some(((asymptote - self.v0) / (asymptote - self.v_th)).ln() / self.theta)
    }
}

/// Outcome of a first-passage simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Passage {
    Fired(f64),
    /// No crossing before the horizon cap.
    Censored,
}

impl Passage {
    pub fn time(self) -> Option<f64> {
        match self {
            Passage::Fired(t) => Some(t),
            Passage::Censored => None,
        }
    }
}

/// Euler–Maruyama first passage to `v_th`, with the crossing time linearly
/// interpolated inside the step.
pub fn first_passage_time(neuron: &LifNeuron, dt: f64, horizon_cap: f64, stream: &mut RandomStream) -> Result<Passage> {
    neuron.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    if !(horizon_cap.is_finite() && horizon_cap > 0.0) {
        return Err(Error::param(
            "horizon_cap",
            format!("must be positive, got {horizon_cap}"),
        ));
    }
    let noise = neuron.sigma * dt.sqrt();
    let max_steps = (horizon_cap / dt).ceil() as u64;
    let mut v = neuron.v0;
    for step in 0..max_steps {
        let mut next = v + (-neuron.theta * v + neuron.mu) * dt;
        if noise > 0.0 {
            next += noise * stream.sample::<f64, _>(StandardNormal);
        }
        if next >= neuron.v_th {
            let t = (step as f64 + (neuron.v_th - v) / (next - v)) * dt;
            return Ok(if t <= horizon_cap {
                Passage::Fired(t)
            } else {
                Passage::Censored
            });
        }
        v = next;
    }
    Ok(Passage::Censored)
}
