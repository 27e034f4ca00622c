use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use evograph::moran::DEFAULT_MAX_STEPS;
use serde::Serialize;

/// Experiments on evolutionary dynamics over undirected graphs.
#[derive(Parser, Debug, Clone)]
#[command(name = "evograph", version, about)]
pub struct Cli {
    /// Master seed; every trial, sample and sweep cell derives its stream from it.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Output file (stdout when absent).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Worker threads (all cores when absent). Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Key-value file, or an earlier artifact, supplying defaults for absent flags.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Write a generated graph as an edge list.
    Generate(GenerateArgs),
    /// Fixation probability by Monte Carlo or exact solve.
    Moran(MoranArgs),
    /// Degree-based fixation bounds.
    Bounds(BoundsArgs),
    /// Aggregation dynamic: a single run or the degree of influence.
    Aggregate(AggregateArgs),
    /// Stabilizer insertion on the complete graph.
    Control(ControlArgs),
    /// Cartesian parameter grid over another command.
    Sweep(SweepArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Generate(_) => "generate",
            Command::Moran(_) => "moran",
            Command::Bounds(_) => "bounds",
            Command::Aggregate(_) => "aggregate",
            Command::Control(_) => "control",
            Command::Sweep(_) => "sweep",
        }
    }
}

pub const COMMAND_NAMES: [&str; 6] = ["generate", "moran", "bounds", "aggregate", "control", "sweep"];

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Complete,
    Cycle,
    Path,
    Star,
    CliqueWheel,
    WeightedStar,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct GraphArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,

    /// Family size: vertices, leaves for stars, clique size for clique-wheel.
    #[arg(long)]
    pub n: Option<usize>,

    /// Weight of the light edge of weighted-star.
    #[arg(long, default_value_t = 1e-6)]
    pub edge_eps: f64,

    /// Edge-list file instead of a family.
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<PathBuf>,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct GenerateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Mc,
    Exact,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EngineName {
    Auto,
    Elided,
    Rejection,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct MoranArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,

    /// Mutant fitness.
    #[arg(long)]
    pub r: f64,

    #[arg(long, value_enum, default_value_t = Method::Mc)]
    pub method: Method,

    /// uniform | vertex:<id> | set:<id,id,..> | clique | ring
    #[arg(long, default_value = "uniform")]
    pub placement: String,

    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,

    #[arg(long, default_value_t = DEFAULT_MAX_STEPS)]
    pub max_steps: u64,

    #[arg(long, value_enum, default_value_t = EngineName::Auto)]
    pub engine: EngineName,

    /// Largest order the exact solver accepts.
    #[arg(long, default_value_t = 16)]
    pub cap: usize,

    /// CSV file for the full exact solution (`bitmask,h`), n <= 8.
    #[arg(long)]
    pub states: Option<PathBuf>,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct BoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,

    /// Fitness values, comma separated or repeated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub r: Vec<f64>,

    /// Also report the exact fixation probability.
    #[arg(long)]
    pub exact: bool,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum AggregateMode {
    Run,
    Influence,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct AggregateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub graph: GraphArgs,

    #[arg(long)]
    pub r: f64,

    /// Mutant fraction; the count is alpha * n rounded to nearest, ties up.
    #[arg(long)]
    pub alpha: f64,

    /// Stop once every edge gap is below eps.
    #[arg(long, default_value_t = 1e-9)]
    pub eps: f64,

    #[arg(long, default_value_t = 10_000_000)]
    pub max_iters: u64,

    #[arg(long, value_enum, default_value_t = AggregateMode::Run)]
    pub mode: AggregateMode,

    /// Run mode: explicit mutant vertices (default: the first alpha * n).
    #[arg(long)]
    pub mutants: Option<String>,

    /// Influence mode: enumerate every placement (the default).
    #[arg(long)]
    pub exhaustive: bool,

    /// Influence mode: sample this many distinct placements instead.
    #[arg(long, conflicts_with = "exhaustive")]
    pub samples: Option<usize>,

    /// Exhaustive enumeration cap.
    #[arg(long, default_value_t = 100_000)]
    pub cap: u64,

    /// Influence mode: list every placement in the artifact.
    #[arg(long)]
    pub per_placement: bool,

    /// CSV file for the per-iteration trajectory (run mode).
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ControlModeName {
    Phases,
    Continuous,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyName {
    HighestFitness,
    Random,
    FixedPrefix,
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct ControlArgs {
    #[arg(long)]
    pub n: usize,

    #[arg(long)]
    pub alpha: f64,

    #[arg(long)]
    pub r: f64,

    #[arg(long)]
    pub beta: f64,

    /// Phase mode: a phase ends once (max - min) / min < eps.
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,

    /// Healthy once every fitness is at most 1 + delta.
    #[arg(long)]
    pub delta: f64,

    #[arg(long, value_enum, default_value_t = ControlModeName::Phases)]
    pub mode: ControlModeName,

    /// Phase mode stabilizer choice; `random` draws from the master seed.
    #[arg(long, value_enum, default_value_t = PolicyName::HighestFitness)]
    pub policy: PolicyName,

    /// CSV file for the per-phase or per-iteration trajectory.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SweepTask {
    Moran,
    Bounds,
    Aggregate,
    Control,
}

impl SweepTask {
    pub fn name(self) -> &'static str {
        match self {
            SweepTask::Moran => "moran",
            SweepTask::Bounds => "bounds",
            SweepTask::Aggregate => "aggregate",
            SweepTask::Control => "control",
        }
    }
}

#[derive(Args, Serialize, Debug, Clone)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub task: SweepTask,

    /// Fixed option for every cell, as key=value.
    #[arg(long)]
    pub set: Vec<String>,

    /// Grid axis, as name=v1,v2,...; repeat for more axes.
    #[arg(long, required = true)]
    pub axis: Vec<String>,
}
