//! Command-line front end.
//!
//! Exit codes: 0 success, 2 unreadable or malformed config, 3 invalid
//! parameters, 4 a simulated interval missed an analytic value, 5 internal
//! consistency failure.

pub mod commands;
pub mod config;
pub mod output;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::calibrate::Method;
use crate::error::Error;
use commands::Rendered;
use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("simulation intervals do not contain every analytic value")]
    CompareFailed,
    #[error("{0}")]
    Consistency(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::CompareFailed => 4,
            CliError::Consistency(_) => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Consistency(_) | Error::SingularChain { .. } | Error::DegenerateService => {
                CliError::Consistency(e.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Direct,
    Pso,
}

#[derive(Debug, Parser)]
#[command(name = "renoq", version, about = "Finite queues with renovation and RED: analysis, simulation, calibration")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact stationary analysis.
    Analyze(CommonArgs),
    /// Discrete-event simulation with 99% confidence intervals.
    Simulate(CommonArgs),
    /// Analytic values against simulation intervals; exit 4 if any misses.
    Compare(CommonArgs),
    /// Search for a renovation vector that meets the configured targets.
    Calibrate(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(short, long)]
    config: PathBuf,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of run lengths in the consecutive-loss pmf and histogram.
    #[arg(long)]
    kmax: Option<usize>,
    /// Objective evaluations allowed to the calibration search.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
}

/// Command-line values that override the config.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub kmax: Option<usize>,
    pub budget: Option<usize>,
    pub method: Option<Method>,
}

impl CommonArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            kmax: self.kmax,
            budget: self.budget,
            method: self.method.map(|m| match m {
                MethodArg::Direct => Method::DirectSearch,
                MethodArg::Pso => Method::Pso,
            }),
        }
    }
}

fn write(out: &mut dyn Write, rendered: Rendered) -> std::io::Result<()> {
    match rendered {
        Rendered::Json(doc) => out.write_all(output::render_json(&doc).as_bytes()),
        Rendered::Csv(text) => out.write_all(text.as_bytes()),
    }
}

/// Runs a parsed command line, writing the document to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let (args, command) = match &cli.command {
        Command::Analyze(a) => (a, "analyze"),
        Command::Simulate(a) => (a, "simulate"),
        Command::Compare(a) => (a, "compare"),
        Command::Calibrate(a) => (a, "calibrate"),
    };
    log::info!("{command} {}", args.config.display());
    let config = RunConfig::load(&args.config)?;
    let ov = args.overrides();
    let format = args.format;
    let io_err = |e: std::io::Error| CliError::Consistency(format!("cannot write output: {e}"));
    match &cli.command {
        Command::Analyze(_) => write(out, commands::analyze_cmd(&config, format, &ov)?).map_err(io_err),
        Command::Simulate(_) => write(out, commands::simulate_cmd(&config, format, &ov)?).map_err(io_err),
        Command::Calibrate(_) => write(out, commands::calibrate_cmd(&config, format, &ov)?).map_err(io_err),
        Command::Compare(_) => {
            let (rendered, ok) = commands::compare_cmd(&config, format, &ov)?;
            write(out, rendered).map_err(io_err)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::CompareFailed)
            }
        }
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RENOQ_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("renoq: {e}");
            e.exit_code()
        }
    }
}
