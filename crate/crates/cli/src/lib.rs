//! Experiment runner for disordered Rabi-model ramps.
//!
//! Subcommands read a flat TOML config (see [`config::ExperimentConfig`]),
//! compute, and write CSV files into `output_dir`. Results of the expensive
//! commands are cached by a digest of the physics fields.

pub mod cache;
pub mod commands;
pub mod config;
pub mod error;
pub mod verify;

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use rabi_quench::scaling::TableId;

use crate::cache::{Cache, Output};
use crate::config::{cache_key, ExperimentConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "rabi-quench", version, about = "Disordered ramps of the normal-phase quantum Rabi model")]
pub struct Cli {
    /// TOML config; every key is optional.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Overrides the config's Monte Carlo seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Skip the result cache for this run.
    #[arg(long, global = true)]
    pub no_cache: bool,
    /// Overrides the config's output directory.
    #[arg(long, global = true)]
    pub output_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// One ramp: final Bogoliubov amplitudes and residual energy.
    Simulate,
    /// Disorder-averaged residual energy over the configured grid.
    Ensemble,
    /// Power-law fit of a CSV of (omega_tau, energy).
    Fit,
    /// Recompute an exponent table (1: duration disorder, 2: end-point
    /// disorder, 3: averaged end point).
    Table {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        id: u8,
    },
    /// Closed-form slow-ramp and freeze-out predictions over the grid.
    Predict,
    /// Run the quick invariant suite; nonzero exit on failure.
    Verify,
}

impl Command {
    fn cache_name(&self) -> Option<String> {
        match self {
            Command::Simulate => Some("simulate".into()),
            Command::Ensemble => Some("ensemble".into()),
            Command::Table { id } => Some(format!("table{id}")),
            Command::Fit | Command::Predict | Command::Verify => None,
        }
    }
}

pub fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut config = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(dir) = &cli.output_dir {
        config.output_dir = dir.clone();
    }
    Ok(config)
}

fn compute(command: Command, config: &ExperimentConfig) -> Result<Output, CliError> {
    match command {
        Command::Simulate => commands::simulate(config),
        Command::Ensemble => commands::ensemble(config),
        Command::Fit => commands::fit(config),
        Command::Table { id } => {
            let id = TableId::try_from(id).map_err(CliError::Config)?;
            commands::table(config, id)
        }
        Command::Predict => {
            let (out, warnings) = commands::predict(config)?;
            for w in warnings {
                eprintln!("{w}");
            }
            Ok(out)
        }
        Command::Verify => {
            let (text, failures) = verify::run(&config.integrator()?);
            print!("{text}");
            if failures > 0 {
                return Err(CliError::Verification(failures));
            }
            Ok(Output::default())
        }
    }
}

/// Run one subcommand: consult the cache, compute on a miss, write the
/// files and print the summary.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let config = load_config(cli)?;
    let cache = (config.cache && !cli.no_cache)
        .then(|| Cache::locate(&config.output_dir));
    let name = cli.command.cache_name();

    let cached = match (&cache, &name) {
        (Some(c), Some(n)) => {
            let key = cache_key(&config, n);
            c.get(&key).map(|o| {
                eprintln!("cache hit {key}");
                o
            })
        }
        _ => None,
    };
    let output = match cached {
        Some(o) => o,
        None => {
            let o = compute(cli.command, &config).map_err(|e| annotate(e, cli.command, &config))?;
            if let (Some(c), Some(n)) = (&cache, &name) {
                c.put(&cache_key(&config, n), &o)?;
            }
            o
        }
    };

    if !output.files.is_empty() {
        fs::create_dir_all(&config.output_dir)?;
        for (file, body) in &output.files {
            fs::write(config.output_dir.join(file), body)?;
        }
    }
    print!("{}", output.stdout);
    Ok(())
}

/// Put the run's parameters next to a numerical failure.
fn annotate(e: CliError, command: Command, c: &ExperimentConfig) -> CliError {
    if let CliError::Numerical(inner) = &e {
        eprintln!(
            "{command:?} failed with g_final = {}, omega_tau = {}, channel = {:?}, sigma = {}, step_mode = {:?}, omega_dt = {}: {inner}",
            c.g_final, c.omega_tau, c.channel, c.sigma, c.step_mode, c.omega_dt
        );
    }
    e
}
