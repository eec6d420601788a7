mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "oracle-opt", version, about = "Distance oracle optimization experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a metric instance.
    Gen(GenArgs),
    /// Optimize an oracle on one instance and print its cost.
    Optimize(OptimizeArgs),
    /// Measure the stretch of an oracle over all or sampled pairs.
    Eval(EvalArgs),
    /// Solve a relaxation once, then round it repeatedly (CSV trial log).
    Trials(TrialsArgs),
    /// Integrality gap sweep on a generated family.
    Gap(GapArgs),
    /// Summarize trial logs into one CSV.
    Report(ReportArgs),
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Family {
    Cycle,
    Uniform,
    Random,
    Setcover,
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub family: Family,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Edge probability for `random`.
    #[arg(long, default_value_t = 0.3)]
    pub edge_prob: f64,
    /// Largest edge weight for `random`.
    #[arg(long, default_value_t = 10)]
    pub max_weight: u32,
    /// Universe size for `setcover`.
    #[arg(long, default_value_t = 3)]
    pub universe: usize,
    /// Number of sets for `setcover`.
    #[arg(long, default_value_t = 3)]
    pub sets: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Algo {
    Tz2Greedy,
    PrLp,
    Tz2oSdp,
    PrOSdp,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Objective {
    Tz,
    Pr,
}

#[derive(Args)]
pub struct OptimizeArgs {
    #[arg(value_enum)]
    pub algo: Algo,
    #[arg(long)]
    pub instance: PathBuf,
    /// Number of levels for `brute` on the TZ objective.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = oracle_opt::relax::DEFAULT_EPSILON)]
    pub epsilon: f64,
    /// Outlier budget f.
    #[arg(long, default_value_t = 0)]
    pub outliers: usize,
    /// Objective for `brute`.
    #[arg(long, value_enum, default_value_t = Objective::Tz)]
    pub objective: Objective,
    /// Pick the f largest Gram diagonals instead of thresholding (`tz2o-sdp`).
    #[arg(long)]
    pub top_f: bool,
    /// Landmark set (or level chain for `brute --k 3`) output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub outlier_file: Option<PathBuf>,
    /// Iteration cap for the SDP solver.
    #[arg(long, default_value_t = 200_000)]
    pub sdp_iters: usize,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Queries {
    All,
    Sample,
}

#[derive(Args)]
pub struct EvalArgs {
    #[arg(value_enum)]
    pub oracle: Objective,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = Queries::All)]
    pub queries: Queries,
    /// Pairs drawn with `--queries sample`.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Levels of the sampled chain when no `--chain-file` is given.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Landmarks for `pr` (a baseline sample is drawn when absent).
    #[arg(long)]
    pub set_file: Option<PathBuf>,
    /// Level chain for `tz` (a chain is sampled when absent).
    #[arg(long)]
    pub chain_file: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rounding {
    PrLp,
    PrBaseline,
    Tz2o,
    Tz2oTopf,
    Pro,
}

#[derive(Args)]
pub struct TrialsArgs {
    #[arg(long, value_enum)]
    pub algo: Rounding,
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = oracle_opt::relax::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0)]
    pub outliers: usize,
    /// Iteration cap for the SDP solver.
    #[arg(long, default_value_t = 200_000)]
    pub sdp_iters: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum GapFamily {
    Cycle,
}

#[derive(Args)]
pub struct GapArgs {
    #[arg(long, value_enum, default_value_t = GapFamily::Cycle)]
    pub family: GapFamily,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    /// Largest n for which the LP is solved.
    #[arg(long, default_value_t = 12)]
    pub lp_max: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReportArgs {
    /// Trial logs written by `trials`.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Optimize(a) => commands::optimize(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Trials(a) => commands::trials(&a),
        Command::Gap(a) => commands::gap(&a),
        Command::Report(a) => commands::report(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
