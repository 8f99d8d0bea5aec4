// Guards like `!(x > 0.0)` are meant to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod config;
mod output;

use config::{Overrides, RunConfig};

/// Exit status 2 marks a refusal (bad config, regime, hypotheses); 1 a failed run.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Refused(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Refused(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<choquard::Error> for CliError {
    fn from(e: choquard::Error) -> Self {
        use choquard::Error as E;
        match e {
            E::Config(_)
            | E::InvalidParameter(_)
            | E::RegimeViolation(_)
            | E::Hypothesis(_)
            | E::Geometry(_)
            | E::AlphaOutOfRange { .. }
            | E::InvalidDimension(_)
            | E::NotPowerOfTwo(_)
            | E::NonPositiveExtent(_) => CliError::Refused(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("i/o error: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "choquard", version, about = "Semiclassical Choquard experiments")]
struct Cli {
    /// Problem configuration (TOML); every key has a default.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory, overriding `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// `section.key=value`, applied after the file; repeatable.
    #[arg(long = "override", value_name = "KEY=VALUE", global = true)]
    overrides: Vec<String>,

    /// Fail instead of warning when a field does not decay at the box boundary.
    #[arg(long, global = true)]
    strict: bool,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the regime and print the constants.
    Validate,
    /// Ground states of the limiting problem for each `problem.lambda`.
    SolveLimit,
    /// Penalized solutions along `problem.eps_list`, with concentration diagnostics.
    Concentrate,
    /// Non-concentration checks for potentials with zeros.
    Nonexist,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides { pairs: cli.overrides, out: cli.out, strict: cli.strict, seed: cli.seed };
    let cfg = RunConfig::load(cli.config.as_deref(), &overrides)?;
    match cli.command {
        Command::Validate => commands::validate(&cfg),
        Command::SolveLimit => commands::solve_limit(&cfg),
        Command::Concentrate => commands::concentrate(&cfg),
        Command::Nonexist => commands::nonexist(&cfg),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
