use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use ankle_core::mechkin::{Architecture, Branch};

#[derive(Debug, Parser)]
#[command(name = "ankle", version, about = "Synthesis, validation and ranking of two-DoF parallel ankles")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize one actuator-architecture pair and write its Pareto front.
    Optimize(OptimizeArgs),
    /// Rank the merged candidates of one or more bundles.
    Rank(RankArgs),
    /// Check RSU solvability over an operational region.
    Validate(ValidateArgs),
    /// Joint solution of one design at one pose.
    Ik(IkArgs),
    /// Performance metrics of one design.
    Metrics(MetricsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ArchArg {
    Spu,
    Rsu,
}

impl From<ArchArg> for Architecture {
    fn from(a: ArchArg) -> Self {
        match a {
            ArchArg::Spu => Architecture::Spu,
            ArchArg::Rsu => Architecture::Rsu,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BranchArg {
    Primary,
    Secondary,
}

impl From<BranchArg> for Branch {
    fn from(b: BranchArg) -> Self {
        match b {
            BranchArg::Primary => Branch::Primary,
            BranchArg::Secondary => Branch::Secondary,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub arch: ArchArg,
    /// Actuator name in the catalog.
    #[arg(long)]
    pub actuator: String,
    /// Actuator catalog (JSON).
    #[arg(long)]
    pub catalog: PathBuf,
    /// Directory of task CSV files.
    #[arg(long)]
    pub tasks: PathBuf,
    /// Design configuration (TOML).
    #[arg(long, alias = "config")]
    pub region: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pop: Option<usize>,
    #[arg(long)]
    pub gens: Option<usize>,
    /// Output bundle (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Suppress per-generation progress records on stderr.
    #[arg(long)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RankArgs {
    /// Result bundles to merge.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// `uniform`, a metric name (all weight on it), or seven comma-separated
    /// weights in metric order.
    #[arg(long, default_value = "uniform")]
    pub weights: String,
    /// Baseline files injected into the pool.
    #[arg(long, num_args = 1..)]
    pub baseline: Vec<PathBuf>,
    /// Extra catalog for baseline actuators missing from the bundles.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    /// Blend of spread into the cost, in [0, 1].
    #[arg(long, default_value_t = 0.0)]
    pub variance_penalty: f64,
    /// Ranked table; `.json` for the full report, otherwise CSV.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-group cost distributions as CSV.
    #[arg(long)]
    pub groups_out: Option<PathBuf>,
    /// Also write the merged bundle, baselines included.
    #[arg(long)]
    pub merged_out: Option<PathBuf>,
}

/// Where the operational region comes from.
#[derive(Debug, Clone, Args)]
pub struct RegionArgs {
    /// Design configuration (TOML) providing the operational region.
    #[arg(long, alias = "config")]
    pub region: Option<PathBuf>,
    /// Square region `[-d, d]^2` in degrees instead of a configuration.
    #[arg(long, conflicts_with = "region")]
    pub square: Option<f64>,
    /// Grid step in degrees; defaults to the configuration's step, or 2.
    #[arg(long)]
    pub step: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum)]
    pub arch: ArchArg,
    /// Design file (TOML).
    #[arg(long)]
    pub params: PathBuf,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Half-width of the scanned configuration window in degrees.
    #[arg(long, default_value_t = 179.0)]
    pub window: f64,
    /// Solvability map (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct IkArgs {
    #[arg(long, value_enum)]
    pub arch: ArchArg,
    #[arg(long)]
    pub params: PathBuf,
    /// `roll,pitch` in degrees.
    #[arg(long, allow_hyphen_values = true)]
    pub pose: String,
    /// Overrides the design file's branch.
    #[arg(long, value_enum)]
    pub branch: Option<BranchArg>,
    #[command(flatten)]
    pub region: RegionArgs,
    /// Actuator catalog, for SPU strokes not in the design file.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub actuator: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct MetricsArgs {
    #[arg(long, value_enum)]
    pub arch: ArchArg,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub actuator: String,
    #[arg(long)]
    pub catalog: PathBuf,
    /// Design configuration (TOML): regions, grid and ground offset.
    #[arg(long, alias = "config")]
    pub region: PathBuf,
    /// Per-pose diagnostics (CSV).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Metric summaries (JSON).
    #[arg(long)]
    pub json: Option<PathBuf>,
}
