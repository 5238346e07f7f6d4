//! `effhmm`: data preparation, training, evaluation and sampling for
//! evidence feed-forward HMM classifiers.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric or
//! degeneracy error.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use effhmm::Variant;

const USAGE: u8 = 1;
const DATA: u8 = 2;
const NUMERIC: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "effhmm",
    version,
    about = "Evidence feed-forward HMM experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Turn an Iris CSV into labeled three-symbol trend sequences.
    IrisPrep(IrisPrepArgs),
    /// Turn tracked points or bounding-box ratios into trend sequences.
    TrackPrep(TrackPrepArgs),
    /// Train one model per class on a seeded split.
    Train(TrainArgs),
    /// Classify the held-out items of a split and report accuracy.
    Eval(EvalArgs),
    /// Draw sequences from a model.
    Sample(SampleArgs),
    /// Print a model's dimensions, rows and validation result.
    Inspect(InspectArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct IrisPrepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    /// Fit bin ranges on the training items of the split only.
    #[arg(long)]
    pub train_only_bins: bool,
    /// Split used by --train-only-bins.
    #[arg(long, default_value_t = 10)]
    pub train_per_class: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackMode {
    /// `label,frame,x1,y1,...,x5,y5` rows.
    Points,
    /// `label,r1 r2 ... rT` rows.
    Ratios,
}

#[derive(Debug, Args, Serialize)]
pub struct TrackPrepArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub mode: TrackMode,
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, default_value = "eff", value_parser = parse_variant)]
    pub variant: Variant,
    #[arg(long, default_value_t = 3)]
    pub states: usize,
    #[arg(long, default_value_t = 0.01)]
    pub threshold: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 10)]
    pub train_per_class: usize,
    /// Alphabet size; defaults to the largest symbol in the data.
    #[arg(long)]
    pub symbols: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Directory of `<label>.json` models, or a `train` output directory.
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub split: PathBuf,
    /// Score by log-likelihood per symbol instead of raw log-likelihood.
    #[arg(long)]
    pub normalized: bool,
    /// Report path; defaults to `eval_report.json` next to the split file.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SampleArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub length: usize,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct InspectArgs {
    #[arg(long)]
    pub model: PathBuf,
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse::<Variant>().map_err(|e| e.to_string())
}

/// A failure with an explicit exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

pub fn fail(code: u8, message: impl Into<String>) -> anyhow::Error {
    Failure {
        code,
        message: message.into(),
    }
    .into()
}

pub fn data_error(message: impl Into<String>) -> anyhow::Error {
    fail(DATA, message)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use effhmm::Error as E;
    for cause in err.chain() {
        if let Some(f) = cause.downcast_ref::<Failure>() {
            return f.code;
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e.root() {
                E::InvalidConfig(_) => USAGE,
                E::DegenerateRange { .. }
                | E::DegenerateBox { .. }
                | E::DegeneratePosterior
                | E::Unsamplable { .. }
                | E::GuardExceeded { .. } => NUMERIC,
                _ => DATA,
            };
        }
    }
    DATA
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::IrisPrep(args) => commands::iris_prep(&args),
        Command::TrackPrep(args) => commands::track_prep(&args),
        Command::Train(args) => commands::train(&args),
        Command::Eval(args) => commands::eval(&args),
        Command::Sample(args) => commands::sample(&args),
        Command::Inspect(args) => commands::inspect(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
