use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use gmapprox::approx::{f2_analytic, f4_from_moments, Approximant, MomentCurves, ROOT_TOL};
use gmapprox::bounds::{d2_closed, d2_generic, pointwise_mse, BoundComparison, BoundCurve};
use gmapprox::costs::{estimate_cost, run_table1, CostReport};
use gmapprox::drift::{DriftModel, DriftPaths};
use gmapprox::neuro::{first_passage_time, phi_psi, run_table2, v2_exponential, FiringTimes, Passage};
use gmapprox::sde::solve_x;
use gmapprox::timebase::{derive_stream, fmt_f64, StreamKey, TimeGrid, FIT_LANE};
use gmapprox::Error;
use serde_json::json;

use crate::config::{ExperimentConfig, Format};

/// Creates `dir` and returns a buffered writer for `dir/name`.
fn create(dir: &Path, name: &str) -> anyhow::Result<BufWriter<File>> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(file))
}

fn write_json(dir: &Path, name: &str, value: &serde_json::Value) -> anyhow::Result<PathBuf> {
    let mut out = create(dir, name)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    out.flush()?;
    Ok(dir.join(name))
}

/// Writes the effective configuration next to the results, so a run can be
/// repeated with `--config <out>/config.json`.
pub fn write_echo(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    write_json(&cfg.output.directory, "config.json", &serde_json::to_value(cfg)?)?;
    Ok(())
}

fn write_approximant(dir: &Path, name: &str, a: &Approximant) -> anyhow::Result<()> {
    let mut out = create(dir, name)?;
    a.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}

/// `F_2` in closed form and `F_4` from the moments of a fitting ensemble
/// drawn on its own lane of the seed.
fn fit_pair(cfg: &ExperimentConfig, grid: TimeGrid) -> gmapprox::Result<(Approximant, Approximant)> {
    let theta = cfg.sde.theta;
    let f2 = f2_analytic(&cfg.model, theta, &grid)?;
    let key = StreamKey::new(cfg.mc.seed).lane(FIT_LANE);
    let fitting = DriftPaths::with_key(cfg.model.clone(), theta, grid, cfg.mc.n_paths, key)?;
    let f4 = f4_from_moments(&MomentCurves::from_source(&fitting)?, theta, ROOT_TOL)?;
    Ok((f2, f4))
}

/// Sample paths of `X`, `X_2 = Y + F_2` and `X_4 = Y + F_4` sharing one
/// noise path each, plus the two approximants.
pub fn simulate(cfg: &ExperimentConfig, display_paths: usize) -> anyhow::Result<()> {
    let sde = cfg.sde()?;
    let grid = *sde.grid();
    let (f2, f4) = fit_pair(cfg, grid)?;
    let mut columns = Vec::with_capacity(display_paths);
    for i in 0..display_paths {
        let (x, _, y) = solve_x(&sde, &cfg.model, &derive_stream(cfg.mc.seed, i as u64))?;
        let x2 = y.add(&f2.accumulated)?;
        let x4 = y.add(&f4.accumulated)?;
        columns.push((x, x2, x4));
    }
    let dir = &cfg.output.directory;
    let mut out = create(dir, "paths.csv")?;
    let suffix = |i: usize| {
        if display_paths == 1 {
            String::new()
        } else {
            format!("_{i}")
        }
    };
    let header: Vec<String> = (0..display_paths)
        .map(|i| {
            let s = suffix(i);
            format!("X{s},X2{s},X4{s}")
        })
        .collect();
    writeln!(out, "t,{}", header.join(","))?;
    for k in 0..grid.len() {
        write!(out, "{}", fmt_f64(grid.t(k)))?;
        for (x, x2, x4) in &columns {
            write!(
                out,
                ",{},{},{}",
                fmt_f64(x.values()[k]),
                fmt_f64(x2.values()[k]),
                fmt_f64(x4.values()[k])
            )?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    write_approximant(dir, "F2.csv", &f2)?;
    write_approximant(dir, "F4.csv", &f4)?;
    log::info!("simulate: {display_paths} path(s) written to {}", dir.display());
    Ok(())
}

/// `F_2` and `F_4` with their drifts.
pub fn approx(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let (f2, f4) = fit_pair(cfg, cfg.grid()?)?;
    let dir = &cfg.output.directory;
    write_approximant(dir, "F2.csv", &f2)?;
    write_approximant(dir, "F4.csv", &f4)?;
    if cfg.wants(Format::Json) {
        let curve = |a: &Approximant| json!({ "order": a.order, "F": a.accumulated.values(), "f": a.drift.values() });
        write_json(
            dir,
            "approx.json",
            &json!({ "t": cfg.grid()?.times().collect::<Vec<_>>(), "F2": curve(&f2), "F4": curve(&f4), "config": cfg }),
        )?;
    }
    Ok(())
}

fn bound_curve(model: &DriftModel, theta: f64, grid: &TimeGrid) -> gmapprox::Result<BoundCurve> {
    match d2_closed(model, theta, grid) {
        Err(Error::NoClosedForm(_)) => d2_generic(model, theta, grid),
        other => other,
    }
}

/// Simulated pointwise error of `F_2` against the bound `d_2`. Returns the
/// largest `mse - d_2 - 3 se`.
pub fn bound(cfg: &ExperimentConfig) -> anyhow::Result<f64> {
    let grid = cfg.grid()?;
    let theta = cfg.sde.theta;
    let f2 = f2_analytic(&cfg.model, theta, &grid)?;
    let paths = DriftPaths::new(cfg.model.clone(), theta, grid, cfg.mc.n_paths, cfg.mc.seed)?;
    let (mse, se) = pointwise_mse(&paths, &f2.accumulated)?;
    let d2 = bound_curve(&cfg.model, theta, &grid)?;
    let cmp = BoundComparison::new(mse, se, d2.d2.clone())?;
    let violation = cmp.max_violation(3.0);
    let dir = &cfg.output.directory;
    let mut out = create(dir, "bound.csv")?;
    cmp.write_csv(&mut out)?;
    out.flush()?;
    if cfg.wants(Format::Json) {
        write_json(
            dir,
            "bound.json",
            &json!({
                "max_violation": violation,
                "l1_mass": d2.l1_mass,
                "closed_form": d2.closed_form,
                "config": cfg,
            }),
        )?;
    }
    println!("max violation (mse - d2 - 3 se): {}", fmt_f64(violation));
    Ok(violation)
}

/// `J_p` of `F_2` and `F_4` for every configured `p`, scored on the
/// evaluation ensemble.
pub fn costs(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let grid = cfg.grid()?;
    let (f2, f4) = fit_pair(cfg, grid)?;
    let paths = DriftPaths::new(cfg.model.clone(), cfg.sde.theta, grid, cfg.mc.n_paths, cfg.mc.seed)?;
    let mut rows = Vec::new();
    for &p in &cfg.costs.p_list {
        let (c2, s2) = estimate_cost(p, &paths, &f2.accumulated)?;
        let (c4, s4) = estimate_cost(p, &paths, &f4.accumulated)?;
        rows.push((p, c2, s2, c4, s4));
    }
    let dir = &cfg.output.directory;
    if cfg.wants(Format::Csv) {
        let mut out = create(dir, "costs.csv")?;
        writeln!(out, "p,J[X2],se_J[X2],J[X4],se_J[X4]")?;
        for (p, c2, s2, c4, s4) in &rows {
            writeln!(
                out,
                "{p},{},{},{},{}",
                fmt_f64(*c2),
                fmt_f64(*s2),
                fmt_f64(*c4),
                fmt_f64(*s4)
            )?;
        }
        out.flush()?;
    }
    if cfg.wants(Format::Json) {
        let records: Vec<_> = rows
            .iter()
            .flat_map(|&(p, c2, s2, c4, s4)| {
                [(2, c2, s2), (4, c4, s4)]
                    .map(|(fit, v, se)| json!({ "p_eval": p, "p_fit": fit, "value": v, "se": se }))
            })
            .collect();
        write_json(dir, "costs.json", &json!({ "records": records, "config": cfg }))?;
    }
    Ok(())
}

fn write_report(cfg: &ExperimentConfig, stem: &str, report: &CostReport) -> anyhow::Result<()> {
    let dir = &cfg.output.directory;
    if cfg.wants(Format::Csv) {
        let mut out = create(dir, &format!("{stem}.csv"))?;
        report.write_csv(&mut out)?;
        out.flush()?;
    }
    if cfg.wants(Format::Json) {
        write_json(dir, &format!("{stem}.json"), &report.to_json())?;
    }
    Ok(())
}

pub fn table1(cfg: &ExperimentConfig) -> anyhow::Result<CostReport> {
    let report = run_table1(&cfg.table1, cfg.mc.seed)?;
    write_report(cfg, "table1", &report)?;
    Ok(report)
}

pub fn table2(cfg: &ExperimentConfig) -> anyhow::Result<CostReport> {
    let outcome = run_table2(&cfg.table2, cfg.mc.seed)?;
    log::info!(
        "table 2: {} of {} simulated inputs censored",
        outcome.censored,
        outcome.simulated_inputs
    );
    write_report(cfg, "table2", &outcome.report)?;
    Ok(outcome.report)
}

/// The embedded-neuron pieces: the explicit approximant for exponential
/// firing, the response convolutions, and a sample of LIF firing times.
pub fn neuron(cfg: &ExperimentConfig) -> anyhow::Result<()> {
    let t2 = &cfg.table2;
    let grid = t2.grid()?;
    let (_, model) = t2
        .scenarios()
        .into_iter()
        .find(|(name, _)| *name == "exponential")
        .expect("exponential scenario is always present");
    let dir = &cfg.output.directory;
    let v2 = v2_exponential(&model, &grid)?;
    write_approximant(dir, "V2.csv", &v2)?;

    let arrival = match &model.firing {
        FiringTimes::Analytic { distribution } => distribution.clone(),
        FiringTimes::Simulated { .. } => unreachable!("exponential scenario has analytic firing"),
    };
    let (phi, psi) = phi_psi(&arrival, t2.response_rate, &grid)?;
    let mut out = create(dir, "phi_psi.csv")?;
    writeln!(out, "t,phi,psi")?;
    for k in 0..grid.len() {
        writeln!(
            out,
            "{},{},{}",
            fmt_f64(grid.t(k)),
            fmt_f64(phi.values()[k]),
            fmt_f64(psi.values()[k])
        )?;
    }
    out.flush()?;

    let drift = model.drift_model().expect("analytic firing gives a drift model");
    let d2 = bound_curve(&drift, t2.theta, &grid)?;
    let mut out = create(dir, "neuron_bound.csv")?;
    writeln!(out, "t,d2")?;
    for k in 0..grid.len() {
        writeln!(out, "{},{}", fmt_f64(grid.t(k)), fmt_f64(d2.d2.values()[k]))?;
    }
    out.flush()?;

    let key = StreamKey::new(cfg.mc.seed).lane(FIT_LANE);
    let mut out = create(dir, "firing_times.csv")?;
    writeln!(out, "trial,time")?;
    let mut censored = 0usize;
    for i in 0..cfg.mc.n_paths {
        match first_passage_time(&t2.neuron, t2.dt, t2.horizon_cap, &mut key.stream(i as u64))? {
            Passage::Fired(t) => writeln!(out, "{i},{}", fmt_f64(t))?,
            Passage::Censored => {
                censored += 1;
                writeln!(out, "{i},")?;
            }
        }
    }
    out.flush()?;
    println!("firing times: {censored} of {} trials censored", cfg.mc.n_paths);
    Ok(())
}
