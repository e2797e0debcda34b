//! `lnml` — luckiness-normalized maximum-likelihood coding of CSV data.
//!
//! Four subcommands over a shared ingestion path:
//!
//! * `codelen` — batch LNML code length of a dataset,
//! * `predict` — the per-observation predictive decomposition of that
//!   same code length (multivariate-t one-step predictives),
//! * `changepoint` — MDL segmentation with LNML segment costs,
//! * `verify` — closed forms vs brute-force integration oracles.
//!
//! Input is strict numeric CSV (UTF-8, comma-separated, one observation
//! per row, optional single header row via `--header`); `-` reads
//! standard input. The luckiness is given either explicitly
//! (`--nu`, `--sigma0`, `--rho2`, optional `--mu0`) or through the
//! data-independent defaults (`--sigma2-floor` and `--radius-R`).
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage/input error.

mod commands;
mod csv;
mod failure;
mod luckiness;
mod output;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::failure::Failure;
use crate::luckiness::LuckinessArgs;
use crate::output::Format;

#[derive(Parser)]
#[command(
    name = "lnml",
    version,
    about = "Luckiness-normalized maximum-likelihood coding for multivariate normal data"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Batch LNML code length of a dataset
    Codelen(CodelenArgs),
    /// Per-observation predictive decomposition of the code length
    Predict(PredictArgs),
    /// MDL change-point segmentation with LNML segment costs
    Changepoint(ChangepointArgs),
    /// Compare the closed forms against brute-force oracles
    Verify(VerifyArgs),
}

/// Input selection shared by the data-reading subcommands.
#[derive(Args)]
struct DataArgs {
    /// Input CSV with one observation per row; `-` reads standard input
    input: String,

    /// Skip a single header row before the data
    #[arg(long)]
    header: bool,
}

/// Report shaping shared by the data-reading subcommands.
#[derive(Args)]
struct OutputArgs {
    /// Report code lengths in bits instead of nats
    #[arg(long)]
    bits: bool,

    /// Output format; the LNML_FORMAT environment variable sets the default
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Args)]
struct CodelenArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    luckiness: LuckinessArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct PredictArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    luckiness: LuckinessArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct ChangepointArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    luckiness: LuckinessArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Minimum segment length (default: m + 1 for m-dimensional data)
    #[arg(long)]
    min_seg: Option<usize>,

    /// Maximum number of interior split points
    #[arg(long, default_value_t = 5)]
    max_splits: usize,
}

#[derive(Args)]
struct VerifyArgs {
    /// Monte Carlo sample count for the capacity cross-check
    #[arg(long, default_value_t = 200_000)]
    mc_samples: usize,

    /// Seed for the Monte Carlo oracle
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Shift the closed-form capacity before comparing (detector sanity hook)
    #[arg(long, hide = true)]
    corrupt_capacity: bool,

    /// Output format; the LNML_FORMAT environment variable sets the default
    #[arg(long, value_enum)]
    format: Option<Format>,
}

fn run(cli: &Cli) -> Result<ExitCode, Failure> {
    match &cli.command {
        Command::Codelen(args) => commands::codelen(args),
        Command::Predict(args) => commands::predict(args),
        Command::Changepoint(args) => commands::changepoint(args),
        Command::Verify(args) => commands::verify(args),
    }
}

fn main() -> ExitCode {
    match run(&Cli::parse()) {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}
