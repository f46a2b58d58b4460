//! `pcap`: logical entropies and thresholds of concatenated codes under
//! Pauli noise, written as CSV.

mod commands;
mod config;
mod output;
mod tables;

use std::io;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::{Opts, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] pauli_capacity::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use pauli_capacity::Error as E;
        match self {
            CliError::Config(_) => 2,
            CliError::Core(E::Budget { .. }) => 3,
            CliError::Core(E::NoBracket(_) | E::NonMonotone(_) | E::NonConvergence(_)) => 4,
            CliError::Core(_) => 2,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "pcap", version, about = "Logical entropy and thresholds of concatenated codes under Pauli noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Average logical entropy at each --p, per level of the stack.
    Entropy,
    /// Noise level where the average logical entropy reaches the target.
    Threshold,
    /// Thresholds of n1-in-n2 codes over a range of n2.
    Sweep,
    /// Largest correctable noise per code class along a grid.
    Frontier,
    /// Reproduce one of the reference tables (1..8).
    Table { id: u8 },
    /// Hashing, upper-bound and infinite bit-flip thresholds.
    Bound,
    /// Monte Carlo threshold with its grid estimates.
    Mc,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Entropy => "entropy".into(),
            Command::Threshold => "threshold".into(),
            Command::Sweep => "sweep".into(),
            Command::Frontier => "frontier".into(),
            Command::Table { id } => format!("table{id}"),
            Command::Bound => "bound".into(),
            Command::Mc => "mc".into(),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.command.name(), cli.opts)?;
    if let Some(n) = cfg.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("--workers {n}: {e}")))?;
    }
    match cli.command {
        Command::Entropy => commands::entropy(&cfg),
        Command::Threshold => commands::threshold(&cfg),
        Command::Sweep => commands::sweep(&cfg),
        Command::Frontier => commands::frontier(&cfg),
        Command::Table { id } => tables::run(&cfg, id),
        Command::Bound => commands::bound(&cfg),
        Command::Mc => commands::mc(&cfg),
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
        Err(e) => {
            eprintln!("pcap: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
