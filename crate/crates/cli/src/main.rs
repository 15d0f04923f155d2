//! `uqled`: file-in/file-out front end for label-error detection, noise
//! injection, evaluation, correlation tests and the synthetic benchmark.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

mod commands;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "uqled",
    version,
    about = "Label-error detection with confident learning and MC dropout"
)]
struct Cli {
    /// Output format for stdout.
    #[arg(long, value_enum, global = true, default_value_t = Format::Json)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corrupt labels with class-dependent noise.
    Inject(InjectArgs),
    /// Flag likely label errors.
    Detect(DetectArgs),
    /// Score flags against a corruption mask.
    Evaluate(EvaluateArgs),
    /// Pearson correlation with a two-sided t-test.
    Stats(StatsArgs),
    /// Run the synthetic benchmark.
    Experiment(ExperimentArgs),
    /// Check a tensor file.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct InjectArgs {
    /// Clean labels (CSV or binary).
    #[arg(long)]
    pub labels: PathBuf,
    /// Flip profile JSON.
    #[arg(long, conflicts_with_all = ["probs", "test_labels"], required_unless_present = "probs")]
    pub profile: Option<PathBuf>,
    /// Held-out probabilities to derive the profile from.
    #[arg(long, requires = "test_labels")]
    pub probs: Option<PathBuf>,
    /// Labels matching `--probs`.
    #[arg(long, requires = "probs")]
    pub test_labels: Option<PathBuf>,
    #[arg(long)]
    pub tau: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_labels: Option<PathBuf>,
    #[arg(long)]
    pub out_mask: Option<PathBuf>,
    /// Where to save a profile derived from `--probs`.
    #[arg(long, requires = "probs")]
    pub out_profile: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// cl-pbnr, cl-mcd, cl-mcd-e, cl-mcd-ens, alg-ens-2 or alg-ens-3.
    #[arg(long)]
    pub alg: String,
    /// Out-of-sample softmax probabilities.
    #[arg(long)]
    pub probs: Option<PathBuf>,
    /// Binary MCD stack.
    #[arg(long)]
    pub stack: Option<PathBuf>,
    #[arg(long)]
    pub labels: PathBuf,
    /// Agreement across forward passes; strict majority by default.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub flags: PathBuf,
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Two-column CSV of paired observations; a header line is optional.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub file: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    if let Err(e) = commands::configure_threads() {
        eprintln!("error: {e}");
        return e.exit_code();
    }
    let result = match &cli.command {
        Command::Inject(args) => commands::inject(args, cli.format),
        Command::Detect(args) => commands::detect(args, cli.format),
        Command::Evaluate(args) => commands::evaluate(args, cli.format),
        Command::Stats(args) => commands::stats(args, cli.format),
        Command::Experiment(args) => commands::experiment(args, cli.format),
        Command::Validate(args) => commands::validate(args, cli.format),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
