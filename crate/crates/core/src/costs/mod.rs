//! Monte Carlo estimates of the power costs `J_p[F] = ∫_0^T E|Z(t) - F(t)|^p dt`.
//!
//! Because `X - X^f = Z - F` path by path, costs only need the accumulated
//! drift `Z`; [`full_path_cross_check`] confirms this by simulating both full
//! processes on a shared noise path.

mod table1;

use std::io::{self, Write};

use serde::Serialize;
use serde_json::Value;

pub use table1::{run_table1, Table1Config};

use crate::approx::Approximant;
use crate::drift::{DriftModel, DriftPaths};
use crate::error::{Error, Result};
use crate::sde::{solve_x, LinearSDE};
use crate::timebase::{derive_stream, map_paths, mean_and_se, trapezoid_slice, Curve, PathSource};

fn check_exponent(p: u32) -> Result<()> {
    if p < 2 || !p.is_multiple_of(2) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

fn path_cost(path: &[f64], curve: &[f64], p: u32, dt: f64, scratch: &mut Vec<f64>) -> f64 {
    scratch.clear();
    scratch.extend(path.iter().zip(curve).map(|(z, f)| (z - f).powi(p as i32)));
    trapezoid_slice(scratch, dt)
}

/// `∫_0^T |Z_i - F|^p dt` for every path, in path order.
pub fn per_path_costs<S: PathSource>(p: u32, source: &S, curve: &Curve) -> Result<Vec<f64>> {
    check_exponent(p)?;
    if source.grid() != curve.grid() {
        return Err(Error::GridMismatch);
    }
    let dt = curve.grid().dt();
    Ok(map_paths(source, |_, z| {
        path_cost(z, curve.values(), p, dt, &mut Vec::new())
    }))
}

/// Mean and standard error of the per-path costs.
pub fn estimate_cost<S: PathSource>(p: u32, source: &S, curve: &Curve) -> Result<(f64, f64)> {
    Ok(mean_and_se(&per_path_costs(p, source, curve)?))
}

/// One cost estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostEntry {
    /// Exponent the curve was fitted for.
    pub p_fit: u32,
    /// Exponent of the cost being evaluated.
    pub p_eval: u32,
    pub value: f64,
    pub se: f64,
}

/// `J_p[F_other] - J_p[F_p]` estimated from paired per-path differences.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapEntry {
    pub p_eval: u32,
    pub value: f64,
    pub se: f64,
}

/// The 2 x 2 block `J_i[F_j]`, `i, j ∈ {2, 4}`, of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioCosts {
    pub scenario: String,
    /// Ordered `J2[F2], J2[F4], J4[F2], J4[F4]`.
    pub entries: Vec<CostEntry>,
    /// Optimality gaps for `p_eval = 2` and `p_eval = 4`.
    pub gaps: Vec<GapEntry>,
}

impl ScenarioCosts {
    pub fn get(&self, p_eval: u32, p_fit: u32) -> Option<&CostEntry> {
        self.entries.iter().find(|e| e.p_eval == p_eval && e.p_fit == p_fit)
    }

    pub fn gap(&self, p_eval: u32) -> Option<&GapEntry> {
        self.gaps.iter().find(|g| g.p_eval == p_eval)
    }
}

/// Evaluates `J_2` and `J_4` of `F_2` and `F_4` on one pass over `source`.
pub fn evaluate_pair<S: PathSource>(scenario: &str, source: &S, f2: &Curve, f4: &Curve) -> Result<ScenarioCosts> {
    f2.check_same_grid(f4)?;
    if source.grid() != f2.grid() {
        return Err(Error::GridMismatch);
    }
    if source.n_paths() == 0 {
        return Err(Error::EmptySample);
    }
    let dt = f2.grid().dt();
    let per_path: Vec<[f64; 4]> = map_paths(source, |_, z| {
        let mut s = Vec::with_capacity(z.len());
        [
            path_cost(z, f2.values(), 2, dt, &mut s),
            path_cost(z, f4.values(), 2, dt, &mut s),
            path_cost(z, f2.values(), 4, dt, &mut s),
            path_cost(z, f4.values(), 4, dt, &mut s),
        ]
    });
    let column = |j: usize| per_path.iter().map(|c| c[j]).collect::<Vec<f64>>();
    let layout = [(2, 2), (2, 4), (4, 2), (4, 4)];
    let entries = layout
        .iter()
        .enumerate()
        .map(|(j, &(p_eval, p_fit))| {
            let (value, se) = mean_and_se(&column(j));
            CostEntry {
                p_fit,
                p_eval,
                value,
                se,
            }
        })
        .collect();
    let diff = |a: usize, b: usize| per_path.iter().map(|c| c[a] - c[b]).collect::<Vec<f64>>();
    let (g2, s2) = mean_and_se(&diff(1, 0));
    let (g4, s4) = mean_and_se(&diff(2, 3));
    Ok(ScenarioCosts {
        scenario: scenario.to_string(),
        entries,
        gaps: vec![
            GapEntry {
                p_eval: 2,
                value: g2,
                se: s2,
            },
            GapEntry {
                p_eval: 4,
                value: g4,
                se: s4,
            },
        ],
    })
}

/// Cost tables for several scenarios plus the configuration that produced
/// them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostReport {
    /// Name of the process in column labels, `X` or `V`.
    pub symbol: String,
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
    pub scenarios: Vec<ScenarioCosts>,
    pub config_echo: Value,
}

/// Flat JSON record of one entry.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostRecord {
    pub scenario: String,
    pub p_fit: u32,
    pub p_eval: u32,
    pub value: f64,
    pub se: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub horizon: f64,
}

impl CostReport {
    pub fn scenario(&self, name: &str) -> Option<&ScenarioCosts> {
        self.scenarios.iter().find(|s| s.scenario == name)
    }

    pub fn records(&self) -> Vec<CostRecord> {
        self.scenarios
            .iter()
            .flat_map(|s| {
                s.entries.iter().map(move |e| CostRecord {
                    scenario: s.scenario.clone(),
                    p_fit: e.p_fit,
                    p_eval: e.p_eval,
                    value: e.value,
                    se: e.se,
                    n_paths: self.n_paths,
                    seed: self.seed,
                    dt: self.dt,
                    horizon: self.horizon,
                })
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let gaps: Vec<Value> = self
            .scenarios
            .iter()
            .flat_map(|s| {
                s.gaps.iter().map(move |g| {
                    serde_json::json!({"scenario": s.scenario, "p_eval": g.p_eval, "value": g.value, "se": g.se})
                })
            })
            .collect();
        serde_json::json!({
            "records": self.records(),
            "paired_gaps": gaps,
            "config": self.config_echo,
        })
    }

    fn column_labels(&self) -> Vec<String> {
        let s = &self.symbol;
        [(2, 2), (2, 4), (4, 2), (4, 4)]
            .iter()
            .map(|(i, j)| format!("J{i}[{s}{j}]"))
            .collect()
    }

    /// One row per scenario: the four costs followed by their standard
    /// errors.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let labels = self.column_labels();
        let se: Vec<String> = labels.iter().map(|l| format!("se_{l}")).collect();
        writeln!(out, "scenario,{},{}", labels.join(","), se.join(","))?;
        for s in &self.scenarios {
            let vals: Vec<String> = s.entries.iter().map(|e| crate::timebase::fmt_f64(e.value)).collect();
            let ses: Vec<String> = s.entries.iter().map(|e| crate::timebase::fmt_f64(e.se)).collect();
            writeln!(out, "{},{},{}", s.scenario, vals.join(","), ses.join(","))?;
        }
        Ok(())
    }
}

/// Per-path `(cost from Z - F, cost from X - X^f)` where `X^f = Y + F`
/// shares the noise path `Y` with `X`.
pub fn cross_check_pairs(
    sde: &LinearSDE,
    model: &DriftModel,
    approximant: &Approximant,
    p: u32,
    n_paths: usize,
    master_seed: u64,
) -> Result<Vec<(f64, f64)>> {
    check_exponent(p)?;
    let grid = *sde.grid();
    if approximant.grid() != &grid {
        return Err(Error::GridMismatch);
    }
    let paths = DriftPaths::new(model.clone(), sde.theta(), grid, n_paths, master_seed)?;
    let via_z = per_path_costs(p, &paths, &approximant.accumulated)?;
    let dt = grid.dt();
    let via_x: Vec<Result<f64>> = (0..n_paths)
        .map(|i| {
            let (x, _, y) = solve_x(sde, model, &derive_stream(master_seed, i as u64))?;
            let xf = y.add(&approximant.accumulated)?;
            Ok(path_cost(x.values(), xf.values(), p, dt, &mut Vec::new()))
        })
        .collect();
    via_z.into_iter().zip(via_x).map(|(a, b)| Ok((a, b?))).collect()
}

/// The cost estimated from full simulations of `X` and `X^f`.
pub fn full_path_cross_check(
    sde: &LinearSDE,
    model: &DriftModel,
    approximant: &Approximant,
    p: u32,
    n_paths: usize,
    master_seed: u64,
) -> Result<(f64, f64)> {
    let pairs = cross_check_pairs(sde, model, approximant, p, n_paths, master_seed)?;
    let via_x: Vec<f64> = pairs.iter().map(|&(_, b)| b).collect();
    Ok(mean_and_se(&via_x))
}
