use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform discretization `t_k = k * dt`, `k = 0..=n_steps`, of `[0, horizon]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct TimeGrid {
    horizon: f64,
    dt: f64,
    n_steps: usize,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    #[serde(rename = "T", alias = "horizon")]
    horizon: f64,
    dt: f64,
}

impl TryFrom<GridRepr> for TimeGrid {
    type Error = Error;

    fn try_from(r: GridRepr) -> Result<Self> {
        TimeGrid::new(r.horizon, r.dt)
    }
}

impl From<TimeGrid> for GridRepr {
    fn from(g: TimeGrid) -> Self {
        GridRepr {
            horizon: g.horizon,
            dt: g.dt,
        }
    }
}

impl TimeGrid {
    /// Builds the grid from a horizon and a step; `horizon / dt` must be an
    /// integer up to rounding noise.
    pub fn new(horizon: f64, dt: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        let steps = (horizon / dt).round();
        if steps < 1.0 {
            return Err(Error::InvalidGrid(format!("dt = {dt} exceeds the horizon {horizon}")));
        }
        if ((steps * dt) - horizon).abs() > 1e-9 * horizon {
            return Err(Error::InvalidGrid(format!(
                "horizon {horizon} is not a whole number of steps of {dt}"
            )));
        }
        Ok(TimeGrid {
            horizon,
            dt,
            n_steps: steps as usize,
        })
    }

    pub fn from_steps(horizon: f64, n_steps: usize) -> Result<Self> {
        if n_steps == 0 {
            return Err(Error::InvalidGrid("n_steps must be at least 1".into()));
        }
        TimeGrid::new(horizon, horizon / n_steps as f64)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of nodes, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn t(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.t(k))
    }

    /// Index of the last node with `t_k <= t`, clamped to the grid.
    pub fn floor_index(&self, t: f64) -> usize {
        if t <= 0.0 {
            return 0;
        }
        ((t / self.dt).floor() as usize).min(self.n_steps)
    }
}

/// Real function sampled at every node of a [`TimeGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr")]
pub struct Curve {
    grid: TimeGrid,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct CurveRepr {
    grid: TimeGrid,
    values: Vec<f64>,
}

impl TryFrom<CurveRepr> for Curve {
    type Error = Error;

    fn try_from(r: CurveRepr) -> Result<Self> {
        Curve::new(r.grid, r.values)
    }
}

impl Curve {
    pub fn new(grid: TimeGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        if let Some((node, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { node, value });
        }
        Ok(Curve { grid, values })
    }

    /// Skips validation; callers guarantee length and finiteness.
    pub(crate) fn from_raw(grid: TimeGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Curve { grid, values }
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Curve::from_raw(grid, vec![0.0; grid.len()])
    }

    pub fn constant(grid: TimeGrid, c: f64) -> Result<Self> {
        Curve::new(grid, vec![c; grid.len()])
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Curve::new(grid, grid.times().map(f).collect())
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.values[0]
    }

    pub fn last(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Value at the node closest to `t`.
    pub fn at(&self, t: f64) -> f64 {
        let k = (t / self.grid.dt()).round().clamp(0.0, self.grid.n_steps() as f64) as usize;
        self.values[k]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Curve> {
        Curve::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    /// Pointwise combination of two curves on the same grid.
    pub fn zip_with(&self, other: &Curve, f: impl Fn(f64, f64) -> f64) -> Result<Curve> {
        self.check_same_grid(other)?;
        Curve::new(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &Curve) -> Result<Curve> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Curve) -> Result<Curve> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Result<Curve> {
        self.map(|v| c * v)
    }

    /// `max_k |self_k - other_k|`.
    pub fn sup_distance(&self, other: &Curve) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn check_same_grid(&self, other: &Curve) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Writes the `t,value` CSV representation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "t,value")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{},{}", fmt_f64(self.grid.t(k)), fmt_f64(*v))?;
        }
        Ok(())
    }
}

/// Full-precision (17 significant digit) float formatting used by every CSV
/// writer in the crate.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Composite trapezoidal rule for `∫_0^T curve(t) dt`.
pub fn trapezoid(curve: &Curve) -> f64 {
    trapezoid_slice(curve.values(), curve.grid().dt())
}

pub(crate) fn trapezoid_slice(values: &[f64], dt: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..n - 1].iter().sum();
    dt * (interior + 0.5 * (values[0] + values[n - 1]))
}

/// `H(t) = e^{-θt} ∫_0^t g(s) e^{θs} ds`, advanced one step at a time with the
/// exact decay factor and a trapezoid over each step.
pub fn exp_weighted_running_integral(g: &Curve, theta: f64) -> Result<Curve> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::param("theta", format!("must be positive, got {theta}")));
    }
    let values = exp_weighted_slice(g.values(), g.grid().dt(), theta);
    Curve::new(*g.grid(), values)
}

pub(crate) fn exp_weighted_slice(g: &[f64], dt: f64, theta: f64) -> Vec<f64> {
    let decay = (-theta * dt).exp();
    let half = 0.5 * dt;
    let mut out = Vec::with_capacity(g.len());
    let mut h = 0.0;
    out.push(h);
    for w in g.windows(2) {
        h = decay * h + half * (w[0] * decay + w[1]);
        out.push(h);
    }
    out
}
