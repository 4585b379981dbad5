use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "qre",
    version,
    about = "Robust quasiconcave envelopes of data samples"
)]
pub struct Cli {
    /// JSON file with default settings; flags take precedence over it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Write tables as JSON instead of CSV.
    #[arg(long, global = true)]
    pub json: bool,
    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the envelope at a list of points.
    Eval(EvalArgs),
    /// Describe upper level sets of the envelope.
    Levelset(LevelsetArgs),
    /// Maximize the envelope over a decision set.
    Solve(SolveArgs),
    /// Acceptance-set constants and the representation check.
    Aspirational(AspirationalArgs),
    /// Run a benchmark study.
    #[command(subcommand)]
    Bench(BenchCommand),
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// Sample file (`.json`, or `.csv` with a `value` column).
    #[arg(long)]
    pub sample: PathBuf,
    /// Lipschitz constant; required for CSV samples, overrides JSON.
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Whether the envelope is monotone; overrides the sample file.
    #[arg(long)]
    pub monotone: Option<bool>,
}

#[derive(Debug, Args)]
pub struct GroupArgs {
    /// Number of interchangeable groups (permutation-invariant mode).
    #[arg(long, requires = "group_size")]
    pub groups: Option<usize>,
    /// Coordinates per group.
    #[arg(long, requires = "groups")]
    pub group_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// CSV of query points, one per row.
    #[arg(long)]
    pub points: PathBuf,
    /// Also report the mixed-binary oracle value.
    #[arg(long)]
    pub oracle: bool,
    /// Big-M for the oracle; defaults to the validity bound plus one.
    #[arg(long)]
    pub big_m: Option<f64>,
    #[command(flatten)]
    pub groups: GroupArgs,
    /// Output file; standard output when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct LevelsetArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// Levels to describe.
    #[arg(
        long = "level",
        required = true,
        value_delimiter = ',',
        allow_hyphen_values = true
    )]
    pub levels: Vec<f64>,
    /// Also write boundary polylines (two-dimensional samples) to this CSV.
    #[arg(long)]
    pub polyline: Option<PathBuf>,
    /// Clip box corner for the polyline rays; defaults to the data maximum.
    #[arg(long, num_args = 2, value_delimiter = ',', allow_hyphen_values = true)]
    pub upper: Option<Vec<f64>>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Binary,
    LevelFunction,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// Problem file (decision set and output map).
    #[arg(long)]
    pub problem: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Binary)]
    pub method: Method,
    /// Stopping tolerance of the level function.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Iteration cap of the level function.
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[command(flatten)]
    pub groups: GroupArgs,
    /// Write the probe or iteration trace to this CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AspirationalArgs {
    #[command(flatten)]
    pub sample: SampleArgs,
    /// Shift the data so the origin lies in its bounding box.
    #[arg(long)]
    pub normalized: bool,
    /// Query points for the representation check.
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum BenchCommand {
    /// Optimality gaps, L1 errors, work counts and contours on the
    /// Cobb-Douglas model.
    CobbDouglas(CobbArgs),
}

#[derive(Debug, Args)]
pub struct CobbArgs {
    /// Sample sizes of the gap study.
    #[arg(long = "J", num_args = 1.., value_delimiter = ',')]
    pub sizes: Option<Vec<usize>>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub lipschitz: Option<f64>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub l1_sizes: Option<Vec<usize>>,
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub runtime_sizes: Option<Vec<usize>>,
    /// Grid points per axis for the L1 error.
    #[arg(long)]
    pub l1_density: Option<usize>,
    /// Cluster count of the concave regression.
    #[arg(long)]
    pub clusters: Option<usize>,
    /// `α0, α1..αN`.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// `c0, c1..cN`.
    #[arg(long, num_args = 1.., value_delimiter = ',')]
    pub cost: Option<Vec<f64>>,
    #[arg(long)]
    pub x_min: Option<f64>,
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Worker cap; falls back to `QRE_THREADS`, then all cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}
