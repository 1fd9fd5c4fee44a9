use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Sparse phase retrieval from Fourier magnitudes.
#[derive(Debug, Parser)]
#[command(name = "gespar", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recover a sparse signal from a measurements file.
    Solve(SolveArgs),
    /// Run a Monte-Carlo experiment grid from a JSON spec.
    Bench(BenchArgs),
    /// Print the autocorrelation and the derived support sets.
    Autocorr(AutocorrArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Gespar,
    Fienup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SupportModeArg {
    /// Forced and candidate indices from the autocorrelation (needs N >= 2n-1).
    Autocorr,
    /// Only index 1 is forced; every index is a candidate.
    None,
}

#[derive(Debug, Args)]
struct SolveArgs {
    /// Measurements JSON: {"N": .., "y": [..]}.
    #[arg(long, short)]
    input: PathBuf,
    /// Native signal length.
    #[arg(long)]
    n: usize,
    /// Sparsity.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    s: u64,
    #[arg(long, value_enum, default_value_t = MethodArg::Gespar)]
    method: MethodArg,
    /// Success threshold on the unweighted objective.
    #[arg(long, default_value_t = 1e-4)]
    tau: f64,
    /// Total swap budget.
    #[arg(long, default_value_t = 6400)]
    iter: usize,
    /// RNG seed. A random seed is drawn and printed when absent.
    #[arg(long, env = "GESPAR_SEED")]
    seed: Option<u64>,
    /// Keep all measurement weights at 1.
    #[arg(long)]
    no_weighting: bool,
    #[arg(long, value_enum, default_value_t = SupportModeArg::Autocorr)]
    support_mode: SupportModeArg,
    /// Where to write the recovered signal JSON.
    #[arg(long, short)]
    output: PathBuf,
    /// Write every DGN trace as a JSON array.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    fienup_restarts: usize,
    #[arg(long, default_value_t = 1000)]
    fienup_max_iters: usize,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Experiment spec JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Directory for `<name>.csv` and `<name>.summary.json`.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads (defaults to the number of CPUs).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    workers: Option<u64>,
    /// Leave the wall_time column empty so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Debug, Args)]
struct AutocorrArgs {
    #[arg(long, short)]
    input: PathBuf,
    #[arg(long)]
    n: usize,
}

/// Process exit classes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Status {
    Usage = 1,
    Io = 2,
    Infeasible = 3,
}

#[derive(Debug)]
struct Failure {
    status: Status,
    error: anyhow::Error,
}

impl Failure {
    fn new(status: Status, error: impl Into<anyhow::Error>) -> Self {
        Self { status, error: error.into() }
    }
}

impl From<gespar::Error> for Failure {
    fn from(error: gespar::Error) -> Self {
        use gespar::Error as E;
        let status = match error {
            E::Infeasible(_) | E::InsufficientOversampling { .. } | E::ZeroSignal => Status::Infeasible,
            _ => Status::Usage,
        };
        Failure::new(status, error)
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(Status::Usage as u8) } else { ExitCode::SUCCESS };
        }
    };
    let result = match cli.command {
        Command::Solve(args) => commands::solve(args),
        Command::Bench(args) => commands::bench(args),
        Command::Autocorr(args) => commands::autocorr(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.status as u8)
        }
    }
}
