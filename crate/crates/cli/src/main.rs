//! Batch front door for the inferential-model library.
//!
//! Five subcommands produce plot-ready tables and JSON verdicts:
//! `contour` (plausibility tables for the worked models), `test`
//! (composite-hypothesis tests on data files), `validate` (validity curves
//! with a dominance verdict), `power` (paired rejection-rate comparisons),
//! and `demo` (canned demonstration bundles).  Outputs are deterministic
//! given the config file and seed, and every artifact carries its seed and
//! config hash in a `#` header line.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use validim::ImError;

/// Command-line failure, split by exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad configuration, schema, flags, or input data: exit code 2.
    Config(String),
    /// Numeric or fitting failure during an otherwise valid run: exit 3.
    Numeric(String),
}

impl CliError {
    /// Maps library errors onto exit codes: violated preconditions are the
    /// caller's mistake (2), everything else is a numeric failure (3).
    pub fn from_precondition(e: ImError) -> Self {
        match &e {
            ImError::InvalidParameter(_) | ImError::InvalidData(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Numeric(e.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numeric(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "validim",
    version,
    about = "Valid inferential models: contours, tests, and Monte Carlo diagnostics"
)]
struct Cli {
    /// JSON configuration file (required by all subcommands except demo)
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Override the seed recorded in the configuration
    #[arg(long, global = true, value_name = "U64")]
    seed: Option<u64>,

    /// Output file (contour, test, validate, power) or directory (demo);
    /// defaults to standard output, or the working directory for demo
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Cap on worker threads; the current build computes sequentially, so
    /// any positive value is accepted as an upper bound
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Override the Monte Carlo replicate count in the configuration
    #[arg(long, global = true, value_name = "N")]
    mc_reps: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plausibility contour table for a worked model
    Contour,
    /// Composite-hypothesis test on a data file, JSON verdict
    Test,
    /// Validity curve and dominance verdict for one model
    Validate,
    /// Rejection-rate comparison along a parameter grid
    Power,
    /// Canned demonstration bundle written as CSV files
    Demo {
        /// One of: false-confidence-abs, false-confidence-fc,
        /// mixture-power, monotone-power
        name: String,
    },
}

fn require_config(cli: &Cli) -> Result<&PathBuf, CliError> {
    cli.config
        .as_ref()
        .ok_or_else(|| CliError::Config("this subcommand requires --config <path>".into()))
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Config("thread cap must be at least one".into()));
        }
    }
    let out = cli.out.as_deref();
    match &cli.command {
        Command::Contour => {
            let cfg = config::load(require_config(cli)?)?;
            commands::cmd_contour(cfg, cli.seed, cli.mc_reps, out)
        }
        Command::Test => {
            let cfg = config::load(require_config(cli)?)?;
            commands::cmd_test(cfg, cli.seed, cli.mc_reps, out)
        }
        Command::Validate => {
            let cfg = config::load(require_config(cli)?)?;
            commands::cmd_validate(cfg, cli.seed, cli.mc_reps, out)
        }
        Command::Power => {
            let cfg = config::load(require_config(cli)?)?;
            commands::cmd_power(cfg, cli.seed, cli.mc_reps, out)
        }
        Command::Demo { name } => commands::cmd_demo(name, cli.seed, cli.mc_reps, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
