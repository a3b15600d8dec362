//! The linear SDE `dX = (-θX + z) dt + σ dW`, its `X = Y + Z` split, and the
//! maps `I: f ↦ F` (`F' = -θF + f`, `F(0) = 0`) and `I^{-1}: F ↦ F' + θF`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::drift::{DriftModel, DriftRealization};
use crate::error::{Error, Result};
use crate::timebase::{exp_weighted_running_integral, Curve, RandomStream, TimeGrid, DRIFT_LANE, NOISE_LANE};

/// Constant-damping linear SDE on a fixed grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSDE {
    theta: f64,
    sigma: f64,
    x0: f64,
    grid: TimeGrid,
}

impl LinearSDE {
    pub fn new(theta: f64, sigma: f64, x0: f64, grid: TimeGrid) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::param("theta", format!("must be positive, got {theta}")));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::param("sigma", format!("must be non-negative, got {sigma}")));
        }
        if !x0.is_finite() {
            return Err(Error::param("x0", "must be finite"));
        }
        Ok(LinearSDE { theta, sigma, x0, grid })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }
}

/// One OU path `Y` with the exact Gaussian transition between nodes.
pub fn simulate_y(sde: &LinearSDE, stream: &mut RandomStream) -> Curve {
    let g = sde.grid;
    let decay = (-sde.theta * g.dt()).exp();
    let sd = sde.sigma * (-(-2.0 * sde.theta * g.dt()).exp_m1() / (2.0 * sde.theta)).sqrt();
    let mut y = sde.x0;
    let mut out = Vec::with_capacity(g.len());
    out.push(y);
    for _ in 0..g.n_steps() {
        y *= decay;
        if sd > 0.0 {
            y += sd * stream.sample::<f64, _>(StandardNormal);
        }
        out.push(y);
    }
    Curve::from_raw(g, out)
}

/// `(E[Y(t)], Cov(Y(t), Y(s)))`.
pub fn ou_mean_cov(sde: &LinearSDE, t: f64, s: f64) -> (f64, f64) {
    let th = sde.theta;
    let m = t.min(s);
    let cov = sde.sigma * sde.sigma * (-th * (t + s - 2.0 * m)).exp() * (-(-2.0 * th * m).exp_m1()) / (2.0 * th);
    ((-th * t).exp() * sde.x0, cov)
}

/// One path of `X` together with its parts `Z` and `Y`. `Y` reads the noise
/// lane and `Z` the drift lane of `stream`, so the two are independent and
/// `Z` coincides with path `stream.index()` of a
/// [`DriftPaths`](crate::drift::DriftPaths) ensemble on the same seed.
pub fn solve_x(sde: &LinearSDE, model: &DriftModel, stream: &RandomStream) -> Result<(Curve, Curve, Curve)> {
    let grid = sde.grid;
    let z = crate::drift::sample_accumulated_path(model, sde.theta, &grid, &mut stream.substream(DRIFT_LANE))?;
    let y = simulate_y(sde, &mut stream.substream(NOISE_LANE));
    let x = y.add(&z)?;
    Ok((x, z, y))
}

/// Like [`solve_x`] but also returns the drift realization itself.
pub fn solve_x_with_drift(
    sde: &LinearSDE,
    model: &DriftModel,
    stream: &RandomStream,
) -> Result<(Curve, Curve, Curve, DriftRealization)> {
    let grid = sde.grid;
    model.validate()?;
    model.check_pairing(sde.theta)?;
    let r = DriftRealization::draw(model, &grid, &mut stream.substream(DRIFT_LANE));
    let z = r.accumulated_path(sde.theta, &grid);
    let y = simulate_y(sde, &mut stream.substream(NOISE_LANE));
    let x = y.add(&z)?;
    Ok((x, z, y, r))
}

/// `F = I f`, the solution of `F' = -θF + f` with `F(0) = 0`.
pub fn apply_i(f: &Curve, theta: f64) -> Result<Curve> {
    exp_weighted_running_integral(f, theta)
}

/// `f = F' + θF`. Central differences inside, second-order one-sided
/// differences at both ends.
pub fn apply_i_inv(big_f: &Curve, theta: f64) -> Result<Curve> {
    if !(theta.is_finite() && theta > 0.0) {
        return Err(Error::param("theta", format!("must be positive, got {theta}")));
    }
    if big_f.first().abs() > 1e-12 {
        return Err(Error::NonzeroStart(big_f.first()));
    }
    let v = big_f.values();
    let n = v.len();
    if n < 3 {
        return Err(Error::InvalidGrid("differentiation needs at least two steps".into()));
    }
    let h = big_f.grid().dt();
    let mut d = Vec::with_capacity(n);
    d.push((-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h));
    for k in 1..n - 1 {
        d.push((v[k + 1] - v[k - 1]) / (2.0 * h));
    }
    d.push((3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h));
    let f = d.iter().zip(v).map(|(dk, fk)| dk + theta * fk).collect();
    Curve::new(*big_f.grid(), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::mean_accumulated;
    use crate::timebase::{derive_stream, fold_paths, PathEnsemble, StreamKey};
    use approx::assert_abs_diff_eq;

    fn sde(sigma: f64, x0: f64, grid: TimeGrid) -> LinearSDE {
        LinearSDE::new(1.5, sigma, x0, grid).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = TimeGrid::new(1.0, 0.1).unwrap();
        assert!(LinearSDE::new(0.0, 1.0, 0.0, g).is_err());
        assert!(LinearSDE::new(1.0, -1.0, 0.0, g).is_err());
        assert!(LinearSDE::new(1.0, 1.0, f64::NAN, g).is_err());
    }

    #[test]
    fn noiseless_y_is_pure_decay() {
        let g = TimeGrid::new(2.0, 1e-2).unwrap();
        let y = simulate_y(&sde(0.0, 1.0, g), &mut derive_stream(0, 0));
        for k in 0..g.len() {
            assert_abs_diff_eq!(y.values()[k], (-1.5 * g.t(k)).exp(), epsilon = 1e-13);
        }
    }

    #[test]
    fn y_ensemble_mean_and_variance() {
        let g = TimeGrid::new(1.0, 1e-2).unwrap();
        let s = sde(1.0, 1.0, g);
        let e = PathEnsemble::generate(g, 10_000, StreamKey::new(3), |mut r| simulate_y(&s, &mut r)).unwrap();
        let col = e.column(g.n_steps());
        let n = col.len() as f64;
        let mean = col.iter().sum::<f64>() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let (m_exact, v_exact) = ou_mean_cov(&s, 1.0, 1.0);
        assert_abs_diff_eq!(m_exact, (-1.5f64).exp(), epsilon = 1e-15);
        assert!((mean - m_exact).abs() < 4.0 * (var / n).sqrt());
        // SE of a Gaussian sample variance
        assert!((var - v_exact).abs() < 4.0 * v_exact * (2.0 / (n - 1.0)).sqrt());
        assert_abs_diff_eq!(v_exact, (1.0 - (-3.0f64).exp()) / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn y_covariance_spot_checks() {
        let g = TimeGrid::new(2.0, 1e-2).unwrap();
        let s = sde(1.0, 0.5, g);
        let e = PathEnsemble::generate(g, 10_000, StreamKey::new(4), |mut r| simulate_y(&s, &mut r)).unwrap();
        let pairs = [
            (10, 10),
            (20, 50),
            (100, 90),
            (150, 199),
            (5, 200),
            (60, 61),
            (120, 40),
            (33, 170),
            (200, 200),
            (80, 140),
        ];
        for (i, j) in pairs {
            let (a, b) = (e.column(i), e.column(j));
            let (ma, _) = ou_mean_cov(&s, g.t(i), 0.0);
            let (mb, _) = ou_mean_cov(&s, g.t(j), 0.0);
            let prods: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).collect();
            let (c, se) = crate::timebase::mean_and_se(&prods);
            let exact = ou_mean_cov(&s, g.t(i), g.t(j)).1;
            assert!((c - exact).abs() < 4.0 * se, "({i},{j}): {c} vs {exact}");
        }
    }

    #[test]
    fn ou_moments_limits_and_symmetry() {
        let g = TimeGrid::new(1.0, 0.1).unwrap();
        let s = sde(1.0, 2.0, g);
        assert_eq!(ou_mean_cov(&s, 0.0, 0.0), (2.0, 0.0));
        assert_abs_diff_eq!(ou_mean_cov(&s, 50.0, 50.0).1, 1.0 / 3.0, epsilon = 1e-15);
        for (t, u) in [(0.3, 0.7), (1.0, 0.2), (0.5, 0.5)] {
            assert_eq!(ou_mean_cov(&s, t, u).1, ou_mean_cov(&s, u, t).1);
        }
    }

    #[test]
    fn split_is_exact() {
        let g = TimeGrid::new(1.0, 1e-3).unwrap();
        let s = sde(1.0, 0.3, g);
        let m = DriftModel::CompoundPoisson {
            lambda: 2.0,
            jump: crate::drift::Distribution::Exponential { rate: 2.0 },
        };
        for i in 0..5 {
            let (x, z, y) = solve_x(&s, &m, &derive_stream(9, i)).unwrap();
            for k in 0..g.len() {
                assert_eq!(x.values()[k], y.values()[k] + z.values()[k]);
            }
        }
    }

    #[test]
    fn deterministic_noiseless_solution_is_i_of_f() {
        let g = TimeGrid::new(2.0, 1e-3).unwrap();
        let f = Curve::from_fn(g, |t| (3.0 * t).cos()).unwrap();
        let (x, _, _) = solve_x(
            &sde(0.0, 0.0, g),
            &DriftModel::Deterministic { f: f.clone() },
            &derive_stream(0, 0),
        )
        .unwrap();
        assert_eq!(x, apply_i(&f, 1.5).unwrap());
        let zero = DriftModel::Deterministic { f: Curve::zeros(g) };
        let (x, _, _) = solve_x(&sde(0.0, 2.0, g), &zero, &derive_stream(0, 0)).unwrap();
        for k in 0..g.len() {
            assert_abs_diff_eq!(x.values()[k], 2.0 * (-1.5 * g.t(k)).exp(), epsilon = 1e-13);
        }
    }

    #[test]
    fn x_mean_matches_analytic_for_single_shot() {
        let g = TimeGrid::new(5.0, 1e-2).unwrap();
        let s = sde(1.0, 0.0, g);
        let m = DriftModel::SingleShot { lambda: 2.0 };
        let src = PathEnsemble::generate(g, 10_000, StreamKey::new(17), |r| solve_x(&s, &m, &r).unwrap().0).unwrap();
        let sums = fold_paths(&src, 2 * g.len(), |_, p, acc| {
            let (a, b) = acc.split_at_mut(g.len());
            for k in 0..p.len() {
                a[k] += p[k];
                b[k] += p[k] * p[k];
            }
        });
        let f2 = mean_accumulated(&m, 1.5, &g).unwrap();
        let n = 10_000.0;
        for k in (0..g.len()).step_by(25) {
            let mean = sums[k] / n;
            let se = ((sums[g.len() + k] / n - mean * mean) / n).sqrt();
            assert!((mean - f2.values()[k]).abs() <= 4.0 * se + 1e-15, "node {k}");
        }
    }

    #[test]
    fn i_examples() {
        let g = TimeGrid::new(1.0, 1e-3).unwrap();
        let one = apply_i(&Curve::constant(g, 1.0).unwrap(), 1.5).unwrap();
        assert_abs_diff_eq!(one.last(), -(-1.5f64).exp_m1() / 1.5, epsilon = 1e-7);
        assert_abs_diff_eq!(one.last(), 0.517_913_226_567_713_4, epsilon = 1e-6);
        let f = Curve::from_fn(g, |t| -(-2.0 * t).exp_m1()).unwrap();
        assert_abs_diff_eq!(
            apply_i(&f, 1.5).unwrap().last(),
            0.342_323_472_744_079_2,
            epsilon = 1e-6
        );
        assert!(apply_i(&Curve::zeros(g), 1.5)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn inverse_examples() {
        let g = TimeGrid::new(1.0, 1e-2).unwrap();
        let lin = Curve::from_fn(g, |t| t).unwrap();
        let f = apply_i_inv(&lin, 1.0).unwrap();
        for k in 0..g.len() {
            assert_abs_diff_eq!(f.values()[k], 1.0 + g.t(k), epsilon = 1e-12);
        }
        assert!(apply_i_inv(&Curve::zeros(g), 1.0)
            .unwrap()
            .values()
            .iter()
            .all(|&v| v == 0.0));
        assert!(matches!(
            apply_i_inv(&Curve::constant(g, 1.0).unwrap(), 1.0),
            Err(Error::NonzeroStart(_))
        ));
    }

    #[test]
    fn round_trips() {
        let g = TimeGrid::new(5.0, 1e-3).unwrap();
        let f = Curve::from_fn(g, |t| -(-2.0 * t).exp_m1()).unwrap();
        let back = apply_i_inv(&apply_i(&f, 1.5).unwrap(), 1.5).unwrap();
        assert!(back.sup_distance(&f).unwrap() < 1e-4);
        let big = Curve::from_fn(g, |t| t.sin() * t).unwrap();
        let again = apply_i(&apply_i_inv(&big, 1.5).unwrap(), 1.5).unwrap();
        assert!(again.sup_distance(&big).unwrap() < 1e-5);
    }
}
