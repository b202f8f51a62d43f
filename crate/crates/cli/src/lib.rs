//! Command-line front end: simulation, order estimation, threshold
//! calibration, detection and the simulation experiments.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 undecidable test.

pub mod commands;
pub mod config;
pub mod experiments;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use mft_core::MftError;

pub use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    /// The report was written but every grid point was masked or zeroed.
    Undecidable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Undecidable(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(m) => write!(f, "data error: {m}"),
            CliError::Undecidable(m) => write!(f, "undecidable: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<MftError> for CliError {
    fn from(e: MftError) -> Self {
        match e {
            MftError::InvalidParameter(_) | MftError::ModelSpec(_) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "mft",
    version,
    about = "Rate change points in spike trains with m-dependent intervals"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a spike train from a model file.
    Simulate(SimulateArgs),
    /// Estimate the dependence order of a spike train.
    EstimateM(EstimateMArgs),
    /// Simulate the limit process and store a threshold table.
    Calibrate(CalibrateArgs),
    /// Test for rate changes and locate change points.
    Detect(DetectArgs),
    /// Run a simulation study and write tidy CSV tables.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    /// TOML model file (a stationary model or a list of segments).
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Recording length in seconds; optional for segment lists.
    #[arg(long = "T", alias = "duration")]
    pub duration: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Spike-train output; change points go to `<out>.cp`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct OrderArgs {
    /// Intervals per section.
    #[arg(long, alias = "section")]
    pub section_len: Option<usize>,
    #[arg(long)]
    pub max_lag: Option<usize>,
    /// Level of the per-lag signed-rank test.
    #[arg(long)]
    pub alpha_m: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct EstimateMArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub order: OrderArgs,
    /// Per-lag CSV output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ThresholdArgs {
    /// Significance level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Limit-process simulations.
    #[arg(long)]
    pub sims: Option<usize>,
    /// Seed of the limit-process simulation.
    #[arg(long)]
    pub sim_seed: Option<u64>,
    /// Grid step; defaults to the smallest window over 100.
    #[arg(long)]
    pub dt: Option<f64>,
    /// Threshold cache directory; defaults to $MFT_CACHE_DIR.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct CalibrateArgs {
    #[arg(long = "T", alias = "duration")]
    pub duration: Option<f64>,
    /// Window sizes, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub windows: Vec<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub threshold: ThresholdArgs,
    /// Same as --sim-seed.
    #[arg(long, conflicts_with = "sim_seed")]
    pub seed: Option<u64>,
    /// Table output; without it the table goes to the cache.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScaleArg {
    Local,
    Global,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdKind {
    Asymptotic,
    Bootstrap,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct DetectArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    pub windows: Vec<f64>,
    /// `auto` or a fixed order.
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long, value_enum)]
    pub scale: Option<ScaleArg>,
    /// Do not zero the neighbourhood of points with undefined scale.
    #[arg(long)]
    pub no_mask: bool,
    /// Minimum intervals per side for a local estimate.
    #[arg(long)]
    pub min_side: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    pub order: OrderArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub threshold: ThresholdArgs,
    /// Precomputed threshold table.
    #[arg(long)]
    pub table: Option<PathBuf>,
    #[arg(long = "threshold", value_enum)]
    pub threshold_kind: Option<ThresholdKind>,
    #[arg(long)]
    pub n_boot: Option<usize>,
    #[arg(long)]
    pub block_len: Option<usize>,
    #[arg(long)]
    pub boot_seed: Option<u64>,
    /// Report output; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV of (h, t, diff, s_hat, G, R, mask) for every window.
    #[arg(long)]
    pub field_csv: Option<PathBuf>,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentName {
    SignificanceLevel,
    AlternativeHistogram,
    WindowSize,
    EstimatorBias,
}

#[derive(Debug, Clone, Args, Serialize, Deserialize)]
pub struct ExperimentArgs {
    #[arg(value_enum)]
    pub name: ExperimentName,
    /// Replicates per setting.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Full-size replicate counts.
    #[arg(long)]
    pub full: bool,
    /// Moving-average decay for significance-level.
    #[arg(long)]
    pub c: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    pub threshold: ThresholdArgs,
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(a),
        Command::EstimateM(a) => commands::estimate_m(a),
        Command::Calibrate(a) => commands::calibrate(a),
        Command::Detect(a) => commands::detect(a),
        Command::Experiment(a) => experiments::run(a),
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("mft: {e}");
            e.exit_code()
        }
    }
}
