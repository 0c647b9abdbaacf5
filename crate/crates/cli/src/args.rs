use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use paradox_core::analysis::DegreeSource;
use paradox_core::transform::DEFAULT_BANDWIDTH;
use paradox_core::{KernelKind, SamplePolicy};
use serde::Serialize;

/// Distributions of the friendship-paradox difference: theory, sampling and
/// measurement.
#[derive(Debug, Parser)]
#[command(name = "paradox", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Density and summary of Δ for a random-graph ensemble.
    #[command(subcommand)]
    Theory(TheoryModel),
    /// Draw a graph from an ensemble.
    #[command(subcommand)]
    Sample(SampleModel),
    /// Measure Δ, κ and Δ^(x) on an edge list.
    Analyze(AnalyzeArgs),
    /// Measured moments of Δ against the configuration and max-ent
    /// predictions.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = KernelArg::Laplace)]
    pub kernel: KernelArg,
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
    pub bandwidth: f64,
    /// Density grid as XMIN:XMAX:NPTS; chosen from the moments if absent.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Probability mass allowed to be dropped when truncating series.
    #[arg(long)]
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelArg {
    Laplace,
    Rect,
}

impl From<KernelArg> for KernelKind {
    fn from(k: KernelArg) -> Self {
        match k {
            KernelArg::Laplace => KernelKind::Laplace,
            KernelArg::Rect => KernelKind::Rectangular,
        }
    }
}

/// Degree distribution: a CSV file, a truncated power law given by its
/// exponent and cutoff, or one fitted to a mean and variance.
#[derive(Debug, Clone, Args, Serialize)]
pub struct DegreeArgs {
    #[arg(long)]
    pub mean: Option<f64>,
    #[arg(long)]
    pub var: Option<f64>,
    #[arg(long, conflicts_with_all = ["mean", "var"])]
    pub alpha: Option<f64>,
    #[arg(long, conflicts_with_all = ["mean", "var"])]
    pub beta: Option<f64>,
    /// CSV of `k,p_k`.
    #[arg(long, conflicts_with_all = ["mean", "var", "alpha", "beta"])]
    pub degrees: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AttributeArgs {
    /// x | k ~ Normal(intercept + slope·k, noise_sd²).
    #[arg(long, default_value_t = 0.0)]
    pub intercept: f64,
    #[arg(long, default_value_t = 1.0)]
    pub slope: f64,
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    /// JSON attribute model, overriding the gaussian flags.
    #[arg(long)]
    pub attr_model: Option<PathBuf>,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoryModel {
    /// Poisson random graph, from the exact atom distribution.
    Poisson {
        #[arg(long)]
        lambda: f64,
        /// Invert the configuration-model transform instead of smoothing
        /// the exact atoms.
        #[arg(long)]
        via_transform: bool,
        /// Bin width of histogram.csv, the binned atom distribution.
        #[arg(long, default_value_t = 1.0)]
        bin_width: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Configuration model.
    Config {
        #[command(flatten)]
        degrees: DegreeArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Maximum-entropy ensemble with assortativity r.
    Maxent {
        #[command(flatten)]
        degrees: DegreeArgs,
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Generalized paradox for a node attribute on the max-ent ensemble.
    Gfp {
        #[command(flatten)]
        degrees: DegreeArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        r: f64,
        #[command(flatten)]
        attributes: AttributeArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleModel {
    /// G(n, p) with p = λ/(n−1).
    Poisson {
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Configuration model with i.i.d. degrees.
    Config {
        #[command(flatten)]
        degrees: DegreeArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::Erase)]
        policy: PolicyArg,
        #[command(flatten)]
        common: Common,
    },
    /// Degree-correlated graph from the max-ent ensemble.
    Maxent {
        #[command(flatten)]
        degrees: DegreeArgs,
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        /// Number of edges to draw.
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value_t = PolicyArg::Erase)]
        policy: PolicyArg,
        /// Also draw node attributes with the given model.
        #[arg(long)]
        attributes: bool,
        #[command(flatten)]
        attribute_model: AttributeArgs,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyArg {
    Erase,
    Reject,
}

impl From<PolicyArg> for SamplePolicy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::Erase => SamplePolicy::Erase,
            PolicyArg::Reject => SamplePolicy::Reject,
        }
    }
}

#[derive(Debug, Args, Serialize)]
pub struct AnalyzeArgs {
    /// Whitespace-separated edge list.
    pub edges: PathBuf,
    /// CSV of `id,x`.
    #[arg(long)]
    pub attributes: Option<PathBuf>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    pub edges: PathBuf,
    #[arg(long, value_enum, default_value_t = SourceArg::Empirical)]
    pub degree_source: SourceArg,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceArg {
    Empirical,
    PowerLawFit,
}

impl From<SourceArg> for DegreeSource {
    fn from(s: SourceArg) -> Self {
        match s {
            SourceArg::Empirical => DegreeSource::Empirical,
            SourceArg::PowerLawFit => DegreeSource::PowerLawFit,
        }
    }
}
