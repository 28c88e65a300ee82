//! `thermocap` command-line interface.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod emit;
mod oracle;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::Failure;

#[derive(Parser, Debug)]
#[command(name = "thermocap", version, about = "Coherent information and quantum capacity of the thermal-noise bosonic channel")]
struct Cli {
    /// JSON file whose keys fill in flags not given on the command line.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacity formula with its certification status.
    Capacity(commands::CapacityArgs),
    /// Coherent and mutual information of thermal inputs over an N_s grid.
    CiCurve(commands::CiCurveArgs),
    /// Critical noise below which the capacity formula is certified.
    Nc(commands::NcArgs),
    /// Entropies and information quantities of a covariance matrix from JSON.
    Evaluate(commands::EvaluateArgs),
    /// Randomized checks of the extremality statements.
    #[command(subcommand)]
    Verify(verify::VerifyCommand),
    /// Comparisons against the truncated Fock-space simulation.
    #[command(subcommand)]
    Oracle(oracle::OracleCommand),
}

/// Flags shared by every command after merging with the config file.
#[derive(Debug, Clone)]
pub struct Common {
    /// `None` lets each command pick its natural format.
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("THERMOCAP_THREADS") else {
        return Ok(());
    };
    let n: usize = raw.trim().parse().map_err(|_| Failure::Usage(format!("THERMOCAP_THREADS must be a positive integer, got {raw:?}")))?;
    if n == 0 {
        return Err(Failure::Usage("THERMOCAP_THREADS must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| Failure::Numeric(e.to_string()))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let file = config::load(cli.config.as_deref())?;
    let common = config::common(&file, cli.format, cli.output)?;
    match cli.command {
        Command::Capacity(a) => commands::capacity(config::merge(&a, &file)?, &common),
        Command::CiCurve(a) => commands::ci_curve(config::merge(&a, &file)?, &common),
        Command::Nc(a) => commands::nc(config::merge(&a, &file)?, &common),
        Command::Evaluate(a) => commands::evaluate(config::merge(&a, &file)?, &common),
        Command::Verify(v) => verify::run(v, &file, &common),
        Command::Oracle(o) => oracle::run(o, &file, &common),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("thermocap: {f}");
            ExitCode::from(f.code())
        }
    }
}
