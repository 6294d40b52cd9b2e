//! `meaniter` — batch front end for the mean-iteration library.
//!
//! Every subcommand reads one JSON experiment description (a single object,
//! or `{"experiments": [...]}` for several independent ones), computes, and
//! emits decimal-string results: values on stdout, traces as CSV files,
//! verdicts and reports as JSON. Exit codes: 0 success, 2 configuration
//! error, 3 domain violation, 4 too few usable variance ratios, 1 any other
//! failure.

mod config;
mod run;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "meaniter", version, about = "High-precision means, residua, and Gauss iteration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a mean on a vector and print it as a decimal string.
    Eval(CommonArgs),
    /// Estimate a mean's residuum by every applicable method.
    Residuum(CommonArgs),
    /// Fit the cubic-defect exponent over a radius schedule.
    ProbeResiduality(CommonArgs),
    /// Check that the residuum estimate is independent of the arity.
    PIndependence(CommonArgs),
    /// Iterate a mean-type mapping and export the trace as CSV.
    Iterate(CommonArgs),
    /// Iterate and verify the quadratic variance-ratio law.
    Verify(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Path to the JSON experiment description.
    #[arg(long)]
    config: PathBuf,

    /// Working precision in bits; overrides the config file and
    /// MEANITER_DEFAULT_BITS.
    #[arg(long)]
    precision_bits: Option<u32>,

    /// Significant digits for values printed by `eval` (default: every
    /// digit needed for an exact round trip).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=1_000_000))]
    digits: Option<u64>,

    /// Acceptance threshold on the verdict's relative gap (`verify`).
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,

    /// Directory receiving trace/verdict files (`iterate`, `verify`).
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Worker threads for independent experiments in one config.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=4096))]
    jobs: u64,
}

fn main() {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Eval(a) => (run::Kind::Eval, a),
        Command::Residuum(a) => (run::Kind::Residuum, a),
        Command::ProbeResiduality(a) => (run::Kind::ProbeResiduality, a),
        Command::PIndependence(a) => (run::Kind::PIndependence, a),
        Command::Iterate(a) => (run::Kind::Iterate, a),
        Command::Verify(a) => (run::Kind::Verify, a),
    };
    let opts = run::Opts {
        precision_bits: args.precision_bits,
        digits: args.digits.map(|d| d as usize),
        tol: args.tol,
        out: args.out.clone(),
        jobs: args.jobs as usize,
    };
    std::process::exit(run::dispatch(kind, &args.config, &opts));
}
