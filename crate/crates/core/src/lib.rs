//! Optimal Gauss–Markov (Ornstein–Uhlenbeck type) approximation of linear
//! SDEs driven by a stochastic drift.
//!
//! The state equation is `dX = (-θX + z(t)) dt + σ dW`, `X(0) = x0`, with a
//! random drift process `z` independent of `W`. Writing `X = Y + Z` with `Y`
//! the pure OU part and `Z(t) = e^{-θt} ∫_0^t z(s) e^{θs} ds`, the best
//! approximant with deterministic drift `f` under the power cost
//! `∫_0^T E|X - X^f|^p dt` only depends on the law of `Z`:
//!
//! * `p = 2`: `F_2 = E[Z]`, `f_2 = E[z]`;
//! * `p = 4`: `F_4(t)` is the unique real root of
//!   `x^3 - 3x^2 E[Z] + 3x E[Z^2] - E[Z^3]`.
//!
//! Modules:
//! * [`timebase`] grids, curves, quadrature, counter-based streams
//! * [`drift`] the stochastic drift models and their moments
//! * [`sde`] the linear SDE, its `Y + Z` split and the maps `I`, `I^{-1}`
//! * [`approx`] optimal curves `F_p` and the recovered drifts `f_p`
//! * [`bounds`] the mean-square error bound `d_2(t)`
//! * [`costs`] Monte Carlo cost estimation and the drift-zoo experiment
//! * [`neuro`] shot-noise input from a layer of LIF neurons

pub mod approx;
pub mod bounds;
pub mod costs;
pub mod drift;
pub mod error;
pub mod neuro;
pub mod sde;
pub mod special;
pub mod timebase;

pub use error::{Error, Result};
