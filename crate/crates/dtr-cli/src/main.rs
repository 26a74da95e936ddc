//! `dtr`: estimate optimal dynamic treatment regimes from sequential
//! randomized trial data.
//!
//! Subcommands: `simulate` (write a benchmark scenario as CSV + schema),
//! `fit` (estimate a regimen), `evaluate` (inverse-probability-weighted
//! value of a fitted regimen on held-out data), `cv` (cost-parameter
//! cross-validation diagnostics), and `bench` (replicated simulation
//! benchmark). Every command prints its resolved configuration to stderr;
//! identical invocations produce byte-identical outputs.

mod commands;
mod csv_io;
mod schema;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(
    name = "dtr",
    version,
    about = "Dynamic treatment regime estimation from sequential trials"
)]
struct Cli {
    /// Cap the number of worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate trajectories from a built-in scenario and write CSV + schema.
    Simulate(SimulateArgs),
    /// Fit a regimen to a CSV dataset.
    Fit(FitArgs),
    /// Evaluate a fitted regimen on a CSV dataset (IPW value to stdout).
    Evaluate(EvaluateArgs),
    /// Report the per-stage cost cross-validation curves for a method.
    Cv(CvArgs),
    /// Run the replicated simulation benchmark.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Scenario: 1 or 2.
    #[arg(long)]
    setting: dtr::SettingKind,
    /// Number of subjects.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    seed: u64,
    /// Output CSV path; the schema is written next to it as
    /// `<out>.schema.json`.
    #[arg(long)]
    out: std::path::PathBuf,
    /// Seed for the population constants (setting 2's latent group means).
    /// Defaults to --seed; pass a shared value to draw several files from
    /// the same population.
    #[arg(long)]
    pop_seed: Option<u64>,
}

#[derive(Args, Debug, Clone)]
struct LearnerFlags {
    /// Kernel: `linear`, `gaussian` (median-heuristic bandwidth), or
    /// `gaussian:<sigma>`.
    #[arg(long, default_value = "linear")]
    kernel: String,
    /// Comma-separated cost grid (default 2^-5, 2^-3, ..., 2^9).
    #[arg(long)]
    cost_grid: Option<String>,
    /// Folds for cost-parameter cross validation.
    #[arg(long, default_value_t = 4)]
    folds: usize,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Estimation method: qlearn, olearn, amol, or amol-eff.
    #[arg(long)]
    method: dtr::Method,
    #[arg(long)]
    data: std::path::PathBuf,
    #[arg(long)]
    schema: std::path::PathBuf,
    #[command(flatten)]
    learner: LearnerFlags,
    /// Output path for the fit report (regimen + diagnostics, JSON).
    #[arg(long)]
    out: std::path::PathBuf,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    /// Fit report or regimen JSON produced by `fit`.
    #[arg(long)]
    model: std::path::PathBuf,
    #[arg(long)]
    data: std::path::PathBuf,
    #[arg(long)]
    schema: std::path::PathBuf,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[arg(long)]
    method: dtr::Method,
    #[arg(long)]
    data: std::path::PathBuf,
    #[arg(long)]
    schema: std::path::PathBuf,
    #[command(flatten)]
    learner: LearnerFlags,
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Scenario: 1 or 2.
    #[arg(long)]
    setting: dtr::SettingKind,
    /// Training subjects per replicate.
    #[arg(long)]
    n: usize,
    #[arg(long)]
    replicates: usize,
    /// Test rollout size per replicate.
    #[arg(long, default_value_t = 10_000)]
    test_n: usize,
    #[arg(long)]
    seed: u64,
    /// Comma-separated methods (default: all four).
    #[arg(long)]
    methods: Option<String>,
    #[command(flatten)]
    learner: LearnerFlags,
    /// Output prefix: writes `<out>.csv` (per-replicate values) and
    /// `<out>.json` (summary).
    #[arg(long)]
    out: std::path::PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Fit(args) => commands::fit(args),
        Command::Evaluate(args) => commands::evaluate(args),
        Command::Cv(args) => commands::cv(args),
        Command::Bench(args) => commands::bench(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
