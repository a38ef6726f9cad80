use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "carnot-gap", version, about = "Poincaré conditions and spectral gaps on Carnot groups")]
pub struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "CARNOT_GAP_THREADS")]
    pub threads: Option<usize>,

    #[arg(short, long, global = true)]
    pub verbose: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// List or show catalog entries.
    Catalog(CatalogArgs),
    /// Check a group or spec file without running anything.
    Validate(ValidateArgs),
    /// Dump |∇_G N|, Δ_G N and the condition ratio at random points (CSV).
    GradCheck(GradCheckArgs),
    /// Estimate the gradient-condition constant on the unit sphere.
    CheckCondition(CheckConditionArgs),
    /// Draw points from exp(−a N^p) (CSV).
    Sample(SampleArgs),
    /// Fit the weighted U-bound constants (A, B) by linear programming.
    UboundFit(UboundFitArgs),
    /// Estimate the spectral gap by Rayleigh–Ritz and/or a grid.
    EstimateGap(EstimateGapArgs),
    /// Empirical q-Poincaré ratio over a function dictionary.
    PoincareRatio(PoincareRatioArgs),
    /// Summarize earlier JSON outputs as markdown and CSV.
    Report(ReportArgs),
}

#[derive(Args, Debug, Serialize)]
pub struct CatalogArgs {
    #[command(subcommand)]
    pub action: CatalogAction,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CatalogAction {
    List {
        /// Include experimental entries.
        #[arg(long)]
        experimental: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    Show {
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the entry in group-file format.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Serialize)]
#[group(required = true, multiple = false)]
pub struct ValidateArgs {
    #[arg(long)]
    pub group_file: Option<PathBuf>,
    #[arg(long)]
    pub spec: Option<PathBuf>,
}

/// A group from the catalog or a file, with a norm preset.
#[derive(Args, Debug, Serialize, Clone)]
pub struct GroupArgs {
    /// Catalog entry name.
    #[arg(long, conflicts_with = "group_file")]
    pub group: Option<String>,
    #[arg(long)]
    pub group_file: Option<PathBuf>,
    /// Norm preset; defaults to the file's norm or the entry's first preset.
    #[arg(long)]
    pub norm: Option<String>,
}

/// A measure: a spec file, or a group plus `a` and `p`.
#[derive(Args, Debug, Serialize, Clone)]
pub struct MeasureArgs {
    #[arg(long, conflicts_with_all = ["group", "group_file"])]
    pub spec: Option<PathBuf>,
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
pub struct GradCheckArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    /// 1-based generator index.
    #[arg(long, default_value_t = 1)]
    pub j0: usize,
    /// Defaults to the norm's own exponent.
    #[arg(long)]
    pub gamma: Option<u32>,
    #[arg(long, default_value_t = 1000)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct CheckConditionArgs {
    #[command(flatten)]
    pub group: GroupArgs,
    #[arg(long, default_value_t = 1)]
    pub j0: usize,
    #[arg(long)]
    pub gamma: Option<u32>,
    #[arg(long, default_value_t = 100_000)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct SampleArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct UboundFitArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 1)]
    pub j0: usize,
    #[arg(long)]
    pub gamma: Option<u32>,
    /// Defaults to the conjugate exponent p/(p−1).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long, default_value_t = 200)]
    pub train: usize,
    #[arg(long, default_value_t = 200)]
    pub holdout: usize,
    #[arg(long, default_value_t = 6)]
    pub dict_degree: u32,
    #[arg(long, default_value_t = 50_000)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Ritz,
    Grid,
    Both,
}

#[derive(Args, Debug, Serialize)]
pub struct EstimateGapArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    pub method: Method,
    #[arg(long, default_value_t = 6)]
    pub dict_degree: u32,
    /// Odd; defaults to 2001, 201 or 51 for dimension 1, 2 or 3.
    #[arg(long)]
    pub grid_points: Option<usize>,
    /// Comma-separated grid half-widths; chosen from the density if absent.
    #[arg(long, value_delimiter = ',')]
    pub half_widths: Option<Vec<f64>>,
    #[arg(long, default_value_t = 100_000)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write (size, lambda1) convergence curves as CSV.
    #[arg(long)]
    pub emit_plot: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct PoincareRatioArgs {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long)]
    pub q: f64,
    /// Allow q not conjugate to p.
    #[arg(long)]
    pub explore: bool,
    #[arg(long, default_value_t = 6)]
    pub dict_degree: u32,
    #[arg(long, default_value_t = 100_000)]
    pub count: usize,
    #[arg(long, default_value_t = 4)]
    pub chains: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// JSON outputs of earlier runs.
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    /// Directory for report.md and summary.csv.
    #[arg(long)]
    pub out_dir: PathBuf,
}
