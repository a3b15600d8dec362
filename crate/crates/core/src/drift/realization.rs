use rand::Rng;
use rand_distr::StandardNormal;

use super::{Distribution, DriftModel};
use crate::approx::MomentCurves;
use crate::error::{Error, Result};
use crate::special::exp_diff_ratio;
use crate::timebase::{exp_weighted_slice, Curve, PathSource, RandomStream, StreamKey, TimeGrid, DRIFT_LANE};

/// One draw of the drift. Jump and arrival times are kept in continuous
/// time; sampled variants hold their node values.
#[derive(Debug, Clone, PartialEq)]
pub enum DriftRealization {
    /// Single jump of height one.
    Step { time: f64 },
    /// Jumps sorted by time.
    Jumps { times: Vec<f64>, sizes: Vec<f64> },
    /// Exponentially decaying shots sorted by arrival time.
    Shots {
        times: Vec<f64>,
        amplitudes: Vec<f64>,
        decay: f64,
    },
    /// Node values of a continuous path.
    Sampled(Vec<f64>),
}

fn sort_events(times: Vec<f64>, sizes: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let mut ev: Vec<(f64, f64)> = times.into_iter().zip(sizes).collect();
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    ev.into_iter().unzip()
}

impl DriftRealization {
    /// Draws a realization on `grid`. The model must be valid.
    pub fn draw(model: &DriftModel, grid: &TimeGrid, rng: &mut RandomStream) -> Self {
        let horizon = grid.horizon();
        match model {
            DriftModel::SingleShot { lambda } => DriftRealization::Step {
                time: Distribution::Exponential { rate: *lambda }.sample(rng),
            },
            DriftModel::Poisson { lambda } => {
                let times = poisson_times(*lambda, horizon, rng, |_| ());
                let sizes = vec![1.0; times.len()];
                DriftRealization::Jumps { times, sizes }
            }
            DriftModel::CompoundPoisson { lambda, jump } => {
                let mut sizes = Vec::new();
                let times = poisson_times(*lambda, horizon, rng, |r| sizes.push(jump.sample(r)));
                DriftRealization::Jumps { times, sizes }
            }
            DriftModel::ShotNoise {
                count,
                amplitude,
                arrival,
                response_rate,
            } => {
                let m = count.sample(rng) as usize;
                let mut times = Vec::with_capacity(m);
                let mut amps = Vec::with_capacity(m);
                for _ in 0..m {
                    times.push(arrival.sample(rng));
                    amps.push(amplitude.sample(rng));
                }
                DriftRealization::shots(times, amps, *response_rate)
            }
            DriftModel::BrownianDrift { lambda } => {
                let sd = grid.dt().sqrt();
                let mut w = 0.0;
                let mut out = Vec::with_capacity(grid.len());
                out.push(0.0);
                for k in 1..grid.len() {
                    w += sd * rng.sample::<f64, _>(StandardNormal);
                    out.push(w + lambda * grid.t(k));
                }
                DriftRealization::Sampled(out)
            }
            DriftModel::OuDrift { lambda, sigma_u, u0 } => {
                let decay = (-lambda * grid.dt()).exp();
                let sd = sigma_u * (-(-2.0 * lambda * grid.dt()).exp_m1() / (2.0 * lambda)).sqrt();
                let mut u = *u0;
                let mut out = Vec::with_capacity(grid.len());
                out.push(u);
                for _ in 1..grid.len() {
                    u = decay * u + sd * rng.sample::<f64, _>(StandardNormal);
                    out.push(u);
                }
                DriftRealization::Sampled(out)
            }
            DriftModel::Deterministic { f } => DriftRealization::Sampled(f.values().to_vec()),
        }
    }

    /// Shot-noise realization from explicit events.
    pub fn shots(times: Vec<f64>, amplitudes: Vec<f64>, decay: f64) -> Self {
        let (times, amplitudes) = sort_events(times, amplitudes);
        DriftRealization::Shots {
            times,
            amplitudes,
            decay,
        }
    }

    /// `z` at the nodes.
    pub fn drift_values(&self, grid: &TimeGrid) -> Vec<f64> {
        let n = grid.len();
        match self {
            DriftRealization::Step { time } => (0..n).map(|k| if grid.t(k) >= *time { 1.0 } else { 0.0 }).collect(),
            DriftRealization::Jumps { times, sizes } => {
                let mut out = Vec::with_capacity(n);
                let (mut next, mut level) = (0, 0.0);
                for k in 0..n {
                    let t = grid.t(k);
                    while next < times.len() && times[next] <= t {
                        level += sizes[next];
                        next += 1;
                    }
                    out.push(level);
                }
                out
            }
            DriftRealization::Shots {
                times,
                amplitudes,
                decay,
            } => {
                let step = (-decay * grid.dt()).exp();
                let mut out = Vec::with_capacity(n);
                let (mut next, mut acc) = (0, 0.0);
                for k in 0..n {
                    let t = grid.t(k);
                    acc *= step;
                    while next < times.len() && times[next] <= t {
                        acc += amplitudes[next] * (-decay * (t - times[next])).exp();
                        next += 1;
                    }
                    out.push(acc);
                }
                out
            }
            DriftRealization::Sampled(v) => v.clone(),
        }
    }

    /// `Z(t) = e^{-θt} ∫_0^t z(s) e^{θs} ds` at the nodes. Jump and shot
    /// variants use their exact per-event closed forms; sampled paths use the
    /// exponential-weighted trapezoid recursion.
    pub fn accumulated_values(&self, theta: f64, grid: &TimeGrid) -> Vec<f64> {
        let n = grid.len();
        match self {
            DriftRealization::Step { time } => (0..n)
                .map(|k| {
                    let d = grid.t(k) - time;
                    if d >= 0.0 {
                        -(-theta * d).exp_m1() / theta
                    } else {
                        0.0
                    }
                })
                .collect(),
            DriftRealization::Jumps { times, sizes } => {
                // Z = (S - E) / θ with S the running jump total and E the
                // θ-discounted one.
                let step = (-theta * grid.dt()).exp();
                let mut out = Vec::with_capacity(n);
                let (mut next, mut level, mut discounted) = (0, 0.0, 0.0);
                for k in 0..n {
                    let t = grid.t(k);
                    discounted *= step;
                    while next < times.len() && times[next] <= t {
                        level += sizes[next];
                        discounted += sizes[next] * (-theta * (t - times[next])).exp();
                        next += 1;
                    }
                    out.push((level - discounted) / theta);
                }
                out
            }
            DriftRealization::Shots {
                times,
                amplitudes,
                decay,
            } => shot_accumulated(times, amplitudes, *decay, theta, grid),
            DriftRealization::Sampled(v) => exp_weighted_slice(v, grid.dt(), theta),
        }
    }

    pub fn drift_path(&self, grid: &TimeGrid) -> Curve {
        Curve::from_raw(*grid, self.drift_values(grid))
    }

    pub fn accumulated_path(&self, theta: f64, grid: &TimeGrid) -> Curve {
        Curve::from_raw(*grid, self.accumulated_values(theta, grid))
    }
}

fn poisson_times(
    lambda: f64,
    horizon: f64,
    rng: &mut RandomStream,
    mut on_jump: impl FnMut(&mut RandomStream),
) -> Vec<f64> {
    let gap = Distribution::Exponential { rate: lambda };
    let mut times = Vec::new();
    let mut t = gap.sample(rng);
    while t <= horizon {
        times.push(t);
        on_jump(rng);
        t += gap.sample(rng);
    }
    times
}

/// Each shot contributes `β (e^{-λ(t-T)} - e^{-θ(t-T)}) / (θ - λ)` after its
/// arrival. Two decaying running sums are used when the rates are well
/// separated; otherwise every event goes through the stable kernel.
fn shot_accumulated(times: &[f64], amps: &[f64], decay: f64, theta: f64, grid: &TimeGrid) -> Vec<f64> {
    let n = grid.len();
    let mut out = Vec::with_capacity(n);
    if (theta - decay).abs() < 1e-3 * theta.max(decay) {
        for k in 0..n {
            let t = grid.t(k);
            let z: f64 = times
                .iter()
                .zip(amps)
                .take_while(|(&s, _)| s <= t)
                .map(|(&s, &b)| b * exp_diff_ratio(decay, theta, t - s))
                .sum();
            out.push(z);
        }
        return out;
    }
    let (fast, slow) = ((-decay * grid.dt()).exp(), (-theta * grid.dt()).exp());
    let inv_gap = 1.0 / (theta - decay);
    let (mut next, mut a, mut b) = (0, 0.0, 0.0);
    for k in 0..n {
        let t = grid.t(k);
        a *= fast;
        b *= slow;
        while next < times.len() && times[next] <= t {
            let d = t - times[next];
            a += amps[next] * (-decay * d).exp();
            b += amps[next] * (-theta * d).exp();
            next += 1;
        }
        out.push((a - b) * inv_gap);
    }
    out
}

/// One realization of `z` at the nodes.
pub fn sample_drift_path(model: &DriftModel, grid: &TimeGrid, stream: &mut RandomStream) -> Result<Curve> {
    model.validate()?;
    model.check_grid(grid)?;
    Ok(DriftRealization::draw(model, grid, stream).drift_path(grid))
}

/// One realization of `Z` at the nodes. Reads the stream exactly like
/// [`sample_drift_path`], so the same stream gives the matching pair `(z, Z)`.
pub fn sample_accumulated_path(
    model: &DriftModel,
    theta: f64,
    grid: &TimeGrid,
    stream: &mut RandomStream,
) -> Result<Curve> {
    model.validate()?;
    model.check_pairing(theta)?;
    model.check_grid(grid)?;
    Ok(DriftRealization::draw(model, grid, stream).accumulated_path(theta, grid))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathKind {
    /// `z(t)`
    Drift,
    /// `Z(t)`
    Accumulated,
}

/// Lazily generated ensemble of drift paths. Path `i` is drawn from stream
/// `i` of the drift lane of `master_seed`, the same stream the full-state
/// simulation in [`crate::sde::solve_x`] uses for its drift part.
#[derive(Debug, Clone)]
pub struct DriftPaths {
    model: DriftModel,
    theta: f64,
    grid: TimeGrid,
    n_paths: usize,
    key: StreamKey,
    kind: PathKind,
}

impl DriftPaths {
    pub fn new(model: DriftModel, theta: f64, grid: TimeGrid, n_paths: usize, master_seed: u64) -> Result<Self> {
        Self::with_key(
            model,
            theta,
            grid,
            n_paths,
            StreamKey::new(master_seed).lane(DRIFT_LANE),
        )
    }

    pub fn with_key(model: DriftModel, theta: f64, grid: TimeGrid, n_paths: usize, key: StreamKey) -> Result<Self> {
        model.validate()?;
        model.check_pairing(theta)?;
        model.check_grid(&grid)?;
        if n_paths == 0 {
            return Err(Error::param("n_paths", "must be positive"));
        }
        Ok(DriftPaths {
            model,
            theta,
            grid,
            n_paths,
            key,
            kind: PathKind::Accumulated,
        })
    }

    pub fn kind(mut self, kind: PathKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn key(&self) -> StreamKey {
        self.key
    }

    pub fn realization(&self, i: usize) -> DriftRealization {
        DriftRealization::draw(&self.model, &self.grid, &mut self.key.stream(i as u64))
    }
}

impl PathSource for DriftPaths {
    fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn n_paths(&self) -> usize {
        self.n_paths
    }

    fn with_path<R>(&self, i: usize, f: impl FnOnce(&[f64]) -> R) -> R {
        let r = self.realization(i);
        let values = match self.kind {
            PathKind::Drift => r.drift_values(&self.grid),
            PathKind::Accumulated => r.accumulated_values(self.theta, &self.grid),
        };
        f(&values)
    }
}

/// Sample moments `E[Z]`, `E[Z^2]`, `E[Z^3]` over `n_paths` accumulated
/// drift paths.
pub fn accumulated_moments_mc(
    model: &DriftModel,
    theta: f64,
    grid: &TimeGrid,
    n_paths: usize,
    master_seed: u64,
) -> Result<MomentCurves> {
    if n_paths < 2 {
        return Err(Error::param("n_paths", "need at least two paths for moments"));
    }
    let paths = DriftPaths::new(model.clone(), theta, *grid, n_paths, master_seed)?;
    MomentCurves::from_source(&paths)
}
