//! Time grids, sampled curves, quadrature and reproducible random streams.

mod ensemble;
mod grid;
mod stream;

pub use ensemble::{fold_paths, map_paths, mean_and_se, pairwise_sum, PathEnsemble, PathSource};
pub use grid::{exp_weighted_running_integral, fmt_f64, trapezoid, Curve, TimeGrid};
pub use stream::{derive_stream, RandomStream, StreamKey, DRIFT_LANE, FIT_LANE, NOISE_LANE};

pub(crate) use grid::{exp_weighted_slice, trapezoid_slice};
