//! driftmon: monitor temporal drift in timestamped text corpora and prepare
//! drift-aware re-annotation samples and evaluation reports.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use driftmon::weirdness::{Averaging, OovPolicy};
use driftmon::MonthKey;

/// Input or configuration problems exit with 2, internal failures with 1.
pub enum CliError {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

pub type CliResult<T> = Result<T, CliError>;

pub fn input_error(msg: impl std::fmt::Display) -> CliError {
    CliError::Input(anyhow::anyhow!("{msg}"))
}

impl From<driftmon::Error> for CliError {
    fn from(e: driftmon::Error) -> Self {
        CliError::Input(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Internal(e.into())
    }
}

#[derive(Parser)]
#[command(
    name = "driftmon",
    version,
    about = "Corpus drift statistics, re-annotation sampling and classifier evaluation",
    after_help = "Every field of the JSON config file can be overridden by a flag; flags win.\n\
                  Outputs land in a run directory named by a hash of the command, resolved\n\
                  config and input checksums, so identical invocations are byte-identical."
)]
pub struct Cli {
    /// JSON config file with defaults for the long-form flags
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Root directory for run outputs
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Seed for every random draw in the run
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Input format; inferred from the file extension when omitted
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatArg>,

    /// Treat input timestamps as Unix epoch seconds instead of RFC 3339
    #[arg(long, global = true)]
    pub epoch_seconds: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Jsonl,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Strategy {
    Random,
    Weirdness,
}

#[derive(Subcommand)]
enum Command {
    /// Frequency tables, per-month drift indicator and its chart
    Stats(StatsArgs),
    /// Word-level weirdness table and per-month sampling pools
    Weirdness(WeirdnessArgs),
    /// Draw random and weirdness-weighted re-annotation samples from a pool
    Sample(SampleArgs),
    /// Score prediction files against adjudicated gold labels
    Evaluate(EvaluateArgs),
    /// Generate a synthetic corpus with a known drift schedule
    Simulate(SimulateArgs),
    /// Split a corpus by the keyword list
    Filter(FilterArgs),
}

/// Flags shared by the statistics commands.
#[derive(Args)]
pub struct ModelOpts {
    /// First month of the baseline period (YYYY-MM)
    #[arg(long, value_name = "YYYY-MM")]
    pub baseline_start: Option<MonthKey>,

    /// Last month of the baseline period, inclusive (YYYY-MM)
    #[arg(long, value_name = "YYYY-MM")]
    pub baseline_end: Option<MonthKey>,

    /// Cap on comments per month before computing statistics
    #[arg(long, value_name = "N")]
    pub monthly_sample: Option<usize>,

    /// Additive smoothing; 0 selects the exact ratio formula
    #[arg(long, value_name = "X")]
    pub epsilon: Option<f64>,

    /// Minimum baseline count for a word to enter the model vocabulary
    #[arg(long, value_name = "N")]
    pub min_count: Option<u64>,
}

#[derive(Args)]
pub struct StatsArgs {
    /// Comment file (JSONL or CSV)
    pub input: PathBuf,

    #[command(flatten)]
    pub model: ModelOpts,

    /// Also emit the weirdness trajectory of this word (repeatable)
    #[arg(long = "word", value_name = "WORD")]
    pub words: Vec<String>,
}

#[derive(Args)]
pub struct WeirdnessArgs {
    /// Comment file (JSONL or CSV)
    pub input: PathBuf,

    #[command(flatten)]
    pub model: ModelOpts,

    /// Handling of tokens outside the model vocabulary: skip | treat-as-one
    #[arg(long, default_value = "skip")]
    pub oov_policy: OovPolicy,

    /// Comment averaging: tokens (every occurrence) | types (unique words)
    #[arg(long, default_value = "tokens")]
    pub averaging: Averaging,
}

#[derive(Args)]
pub struct SampleArgs {
    /// Pool CSV with columns id,weight (empty weight = undefined)
    pub pool: PathBuf,

    /// Sample size per strategy
    #[arg(short = 'n', long, value_name = "N")]
    pub sample_size: Option<usize>,

    /// Strategy to run (repeatable); default runs both
    #[arg(long, value_enum)]
    pub strategy: Vec<Strategy>,
}

#[derive(Args)]
pub struct EvaluateArgs {
    /// Prediction CSVs with columns id,prob; the file stem names the model
    #[arg(required = true)]
    pub predictions: Vec<PathBuf>,

    /// Gold CSV with columns id,annotator1,annotator2,supervisor
    #[arg(long, value_name = "FILE")]
    pub gold: PathBuf,

    /// Comment-weirdness CSV (id,weight) used for slicing, e.g. a pool file
    #[arg(long, value_name = "FILE")]
    pub weirdness: Option<PathBuf>,

    /// Upper edge of the low-weirdness slice
    #[arg(long, value_name = "X")]
    pub threshold_low: Option<f64>,

    /// Lower edge of the high-weirdness slice
    #[arg(long, value_name = "X")]
    pub threshold_high: Option<f64>,
}

#[derive(Args)]
pub struct SimulateArgs {
    /// Drift spec JSON
    pub spec: PathBuf,
}

#[derive(Args)]
pub struct FilterArgs {
    /// Comment file (JSONL or CSV)
    pub input: PathBuf,

    /// Keyword file: one keyword per line, `#` comments
    #[arg(long, value_name = "FILE")]
    pub keywords: PathBuf,

    /// Require whole-token matches instead of prefix matches
    #[arg(long)]
    pub exact: bool,
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Stats(args) => commands::stats(&cli, args),
        Command::Weirdness(args) => commands::weirdness(&cli, args),
        Command::Sample(args) => commands::sample(&cli, args),
        Command::Evaluate(args) => commands::evaluate(&cli, args),
        Command::Simulate(args) => commands::simulate(&cli, args),
        Command::Filter(args) => commands::filter(&cli, args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(CliError::Internal(e)) => {
            eprintln!("internal error: {e:#}");
            ExitCode::from(1)
        }
    }
}
