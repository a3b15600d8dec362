//! `gmapprox` command-line driver.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{ConfigError, ExperimentConfig, Format};

#[derive(Debug, Parser)]
#[command(name = "gmapprox", version, about = "Optimal Gauss-Markov approximation experiments")]
struct Cli {
    /// TOML config file, or JSON when the name ends in `.json`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo paths; also applies to the table commands.
    #[arg(long, global = true)]
    paths: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Horizon T; also applies to the table commands.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sample paths of X, X2 and X4 sharing one noise path, plus F2 and F4.
    Simulate {
        #[arg(long, default_value_t = 1)]
        display_paths: usize,
    },
    /// F2 and F4 with their drifts.
    Approx,
    /// Simulated pointwise error of F2 against the bound d2.
    Bound,
    /// J_p of F2 and F4 for the configured exponents.
    Costs,
    /// Costs of F2 and F4 across the five drift models.
    Table1,
    /// Costs of V2 and V4 for the embedded neuron.
    Table2,
    /// Explicit approximant, response convolutions and LIF firing times.
    Neuron,
}

fn effective_config(cli: &Cli) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.mc.seed = seed;
    }
    if let Some(n) = cli.paths {
        cfg.mc.n_paths = n;
        cfg.table1.n_paths = n;
        cfg.table2.n_paths = n;
    }
    if let Some(dir) = &cli.out {
        cfg.output.directory = dir.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.formats = vec![f];
    }
    if let Some(t) = cli.horizon {
        cfg.grid.horizon = t;
        cfg.table1.horizon = t;
        cfg.table2.horizon = t;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = effective_config(cli)?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(ConfigError::new("--threads", "must be positive").into());
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    commands::write_echo(&cfg)?;
    match cli.command {
        Command::Simulate { display_paths } => {
            if display_paths == 0 {
                return Err(ConfigError::new("--display-paths", "must be positive").into());
            }
            commands::simulate(&cfg, display_paths)
        }
        Command::Approx => commands::approx(&cfg),
        Command::Bound => commands::bound(&cfg).map(|_| ()),
        Command::Costs => commands::costs(&cfg),
        Command::Table1 => commands::table1(&cfg).map(|_| ()),
        Command::Table2 => commands::table2(&cfg).map(|_| ()),
        Command::Neuron => commands::neuron(&cfg),
    }
}

/// 2 for bad input, 3 when the numerics fail, 1 for anything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigError>().is_some() {
        return 2;
    }
    match err.downcast_ref::<gmapprox::Error>() {
        Some(e) if e.is_numerical() => 3,
        Some(_) => 2,
        None => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
