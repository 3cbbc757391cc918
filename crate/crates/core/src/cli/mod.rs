//! The `interpoint` command-line front end.
//!
//! Every subcommand resolves its flags into a serializable config, runs it,
//! and writes a versioned JSON report `{"schema": 1, "config": …, "result": …}`
//! (or a CSV table when `--out` ends in `.csv`). A report, or a bare config,
//! can be replayed with `--config`.

mod args;
mod commands;
mod figures;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

pub use args::parse_distance;
pub use commands::{BoundsConfig, Constants, DistConfig, EcdfConfig, RateConfig, RegularityCmdConfig, TestConfig, VolumeConfig};
pub use figures::{FigureConfig, FigureKind};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const DATA: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

/// Report schema version.
pub const SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Data(_) => exit::DATA,
            CliError::Numerical(_) => exit::NUMERICAL,
        }
    }
}

impl From<crate::Error> for CliError {
    fn from(e: crate::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else if matches!(e, crate::Error::InvalidParameter(_)) {
            CliError::Usage(e.to_string())
        } else {
            CliError::Data(e.to_string())
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "interpoint", version, about = "Generalized interpoint distances, ball volumes and L2 bounds")]
pub struct Cli {
    /// Base seed for every Monte Carlo stream.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (results do not depend on this).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output file (JSON report, or CSV when it ends in `.csv`); directory for `figures`.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Replay a JSON config or a previous report instead of reading flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Within- and between-sample interpoint distances.
    Dist(commands::DistArgs),
    /// Exact, bounded and Monte Carlo ball volumes over a radius grid.
    Volume(commands::VolumeArgs),
    /// Volume-regularity verdict and Ahlfors exponent fit.
    Regularity(commands::RegularityArgs),
    /// Distance ECDFs and the Kolmogorov discrepancy.
    Ecdf(commands::EcdfArgs),
    /// Permutation two-sample test on interpoint distances.
    Test(commands::TestArgs),
    /// L2 inequality checks and the discrepancy rate.
    Bounds(commands::BoundsArgs),
    /// Regenerate the volume and ball-shape figures.
    Figures(figures::FigureArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Dist(_) => "dist",
            Command::Volume(_) => "volume",
            Command::Regularity(_) => "regularity",
            Command::Ecdf(_) => "ecdf",
            Command::Test(_) => "test",
            Command::Bounds(_) => "bounds",
            Command::Figures(_) => "figures",
        }
    }
}

/// A fully resolved run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum ExperimentConfig {
    Dist(DistConfig),
    Volume(VolumeConfig),
    Regularity(RegularityCmdConfig),
    Ecdf(EcdfConfig),
    Test(TestConfig),
    Bounds(Box<BoundsConfig>),
    Figures(FigureConfig),
}

impl ExperimentConfig {
    fn name(&self) -> &'static str {
        match self {
            ExperimentConfig::Dist(_) => "dist",
            ExperimentConfig::Volume(_) => "volume",
            ExperimentConfig::Regularity(_) => "regularity",
            ExperimentConfig::Ecdf(_) => "ecdf",
            ExperimentConfig::Test(_) => "test",
            ExperimentConfig::Bounds(_) => "bounds",
            ExperimentConfig::Figures(_) => "figures",
        }
    }
}

/// Accept either a bare config or a report carrying one under `"config"`.
fn load_config(path: &std::path::Path) -> CliResult<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let inner = match value.get("config") {
        Some(c) if value.get("schema").is_some() => c.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // a second initialization only happens in-process (tests); the pool size is immaterial then
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config = match (&cli.config, &cli.command) {
        (Some(path), cmd) => {
            let cfg = load_config(path)?;
            if let Some(cmd) = cmd {
                if cmd.name() != cfg.name() {
                    return Err(CliError::Usage(format!(
                        "config is for `{}` but the `{}` subcommand was given",
                        cfg.name(),
                        cmd.name()
                    )));
                }
            }
            cfg
        }
        (None, Some(cmd)) => commands::resolve(cmd, cli.seed)?,
        (None, None) => return Err(CliError::Usage("a subcommand or --config is required".into())),
    };
    commands::run(&config, cli.out.as_deref())
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => exit::OK,
                _ => exit::USAGE,
            };
        }
    };
    match execute(cli) {
        Ok(()) => exit::OK,
        Err(e) => {
            eprintln!("interpoint: {e}");
            e.code()
        }
    }
}

/// Entry point for the binary.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}
