//! Experiment runner for the singular-drift library.
//!
//! Usage: `sdrift <subcommand> <config> [--seed N] [--workers N] [--out PATH]`.
//! Each subcommand reads a flat key-value config (see [`config`]), runs one
//! library operation, writes a CSV artifact with a header row naming every
//! column, and prints a one-line summary that ends with the artifact path.
//!
//! Exit codes: 0 success; 2 config trouble (parse failures, missing or
//! unknown keys, structurally invalid requests); 3 domain errors; 4
//! non-convergence; 5 i/o failures.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::Config;
use crate::error::CliError;

#[derive(Parser)]
#[command(
    name = "sdrift",
    version,
    about = "Survival-probability experiments for diffusions with singular drift"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// One subcommand per library operation.
#[derive(Subcommand)]
enum Command {
    /// Closed-form decay rate constant of the survival probability.
    Rate(RunArgs),
    /// Closed-form survival probabilities (driftless or inverse-linear).
    SurvivalClosed(RunArgs),
    /// Monte Carlo survival probability with absorption at the origin.
    SurvivalMc(RunArgs),
    /// Cross-check the direct estimator against the path-weighted one.
    FkCheck(RunArgs),
    /// Interval exit through the upper end: Monte Carlo vs scale identity.
    TwoSided(RunArgs),
    /// Importance-sampled survival estimates across a grid of horizons.
    TiltMc(RunArgs),
    /// Minimize the discretized path functional; report the gap to the rate constant.
    Varmin(RunArgs),
    /// Couple envelope diffusions on shared noise and count ordering violations.
    Compare(RunArgs),
    /// Fit the stretched-exponential tail law to survival estimates.
    Tailfit(RunArgs),
    /// Check polynomial-ratio envelopes for a slowly varying function.
    Potter(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Rate(_) => "rate",
            Command::SurvivalClosed(_) => "survival-closed",
            Command::SurvivalMc(_) => "survival-mc",
            Command::FkCheck(_) => "fk-check",
            Command::TwoSided(_) => "two-sided",
            Command::TiltMc(_) => "tilt-mc",
            Command::Varmin(_) => "varmin",
            Command::Compare(_) => "compare",
            Command::Tailfit(_) => "tailfit",
            Command::Potter(_) => "potter",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Rate(args)
            | Command::SurvivalClosed(args)
            | Command::SurvivalMc(args)
            | Command::FkCheck(args)
            | Command::TwoSided(args)
            | Command::TiltMc(args)
            | Command::Varmin(args)
            | Command::Compare(args)
            | Command::Tailfit(args)
            | Command::Potter(args) => args,
        }
    }
}

/// Arguments shared by every subcommand.
#[derive(Args)]
struct RunArgs {
    /// Path to the key-value config file.
    config: PathBuf,
    /// Override `sim.seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Override `run.workers` from the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Override `run.out` from the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command.name(), cli.command.args()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(name: &'static str, args: &RunArgs) -> Result<String, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|err| CliError::Io(format!("cannot read {}: {err}", args.config.display())))?;
    let cfg = Config::parse(&text)?;
    // A config may pin the subcommand it was written for; invoking any
    // other one is then rejected before any work happens.
    if let Some(tag) = cfg.get("run.subcommand") {
        if tag != name {
            return Err(CliError::Config(format!(
                "config names subcommand `{tag}` but `{name}` was invoked"
            )));
        }
    }
    // Read the config-side values even when a flag overrides them, so they
    // count as consumed rather than unknown.
    let cfg_out = cfg.get("run.out").map(PathBuf::from);
    let out = match (&args.out, cfg_out) {
        (Some(flag), _) => flag.clone(),
        (None, Some(path)) => path,
        (None, None) => {
            return Err(CliError::Config(
                "missing key `run.out` (or pass --out)".into(),
            ))
        }
    };
    let workers = match args.workers {
        Some(n) => Some(n),
        None => cfg.get_usize("run.workers")?,
    };
    commands::dispatch(name, &cfg, args.seed, workers, &out)
}
