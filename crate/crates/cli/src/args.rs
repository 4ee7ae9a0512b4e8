use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mebk::simlab::{ScenarioId, Selector};
use mebk::{AlphaChoice, Normalization, Support, SupportPolicy};
use serde::{Deserialize, Serialize};

use crate::output::Format;

/// Beta-kernel density estimation with Bayesian adaptive or UCV bandwidths.
#[derive(Debug, Parser)]
#[command(name = "mebk", version)]
pub struct Cli {
    /// Worker threads. Falls back to MEBK_THREADS, then to all cores.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit an estimator to data; write a model JSON and a density grid CSV.
    Fit(FitArgs),
    /// Re-emit the density grid of a saved model.
    Grid(GridArgs),
    /// Select bandwidths for data without building a grid.
    Bandwidth(BandwidthArgs),
    /// ISE replications on a simulation scenario.
    Simulate(SimulateArgs),
    /// Mean ISE over a grid of prior shapes and scales.
    Sweep(SweepArgs),
    /// Selector wall-clock times over sample sizes.
    Benchmark(BenchmarkArgs),
    /// Cross-validated average log-likelihood on data.
    Loglik(LoglikArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DataArgs {
    /// CSV of n rows by d numeric columns; a non-numeric first row is a header.
    #[arg(long, required_unless_present = "dataset", conflicts_with = "dataset")]
    pub input: Option<PathBuf>,

    /// A bundled dataset instead of a file: cholesterol or marks.
    #[arg(long)]
    pub dataset: Option<String>,

    /// Header names of the columns to use, comma-separated. Default: all.
    #[arg(long, value_delimiter = ',')]
    pub columns: Vec<String>,

    /// Lift the five-column cap.
    #[arg(long)]
    #[serde(skip)]
    pub allow_high_dim: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PriorArgs {
    /// Prior shape: `auto` for n^(2/5), or a number above 1.5.
    #[arg(long, default_value = "auto")]
    pub alpha: AlphaChoice,

    /// Prior scale, shared by every axis.
    #[arg(long, default_value_t = mebk::bandwidth::DEFAULT_BETA)]
    pub beta: f64,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output file. Default: stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitSelector {
    Bayes,
    Ucv,
    /// Global bandwidths given with --h.
    Fixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationArg {
    Raw,
    Normalized,
}

impl From<NormalizationArg> for Normalization {
    fn from(n: NormalizationArg) -> Self {
        match n {
            NormalizationArg::Raw => Normalization::Raw,
            NormalizationArg::Normalized => Normalization::Normalized,
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// `a1:b1,a2:b2,...`, `sample-range`, or `estimate`.
    #[arg(long, value_parser = parse_support, default_value = "estimate")]
    pub support: SupportPolicy,

    #[arg(long, value_enum, default_value = "bayes")]
    pub selector: FitSelector,

    #[command(flatten)]
    pub prior: PriorArgs,

    /// Global bandwidths for `--selector fixed`, one per column or one for all.
    #[arg(long, value_delimiter = ',')]
    pub h: Vec<f64>,

    #[arg(long, value_enum, default_value = "normalized")]
    pub normalization: NormalizationArg,

    /// Points per axis: `200` on every axis, or `100x100`.
    #[arg(long, value_parser = parse_grid, default_value = "200")]
    pub grid: GridSpec,

    /// Seed for quasi-Monte-Carlo cubature in four or more dimensions.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Directory for model.json and density.csv.
    #[arg(long, default_value = ".")]
    #[serde(skip)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Model JSON written by `fit`.
    #[arg(long)]
    pub model: PathBuf,

    /// Override the model's grid.
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<GridSpec>,

    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BandwidthArgs {
    #[command(flatten)]
    pub data: DataArgs,

    #[arg(long, value_parser = parse_support, default_value = "estimate")]
    pub support: SupportPolicy,

    #[arg(long, default_value = "bayes")]
    pub selector: Selector,

    #[command(flatten)]
    pub prior: PriorArgs,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: ScenarioId,

    #[arg(long)]
    pub n: usize,

    #[arg(long, default_value = "bayes")]
    pub selector: Selector,

    #[command(flatten)]
    pub prior: PriorArgs,

    #[arg(long, default_value_t = 100)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Replace the scenario's estimation support.
    #[arg(long, value_parser = parse_support)]
    pub support: Option<SupportPolicy>,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[arg(long)]
    pub scenario: ScenarioId,

    #[arg(long)]
    pub n: usize,

    #[arg(long, value_delimiter = ',', required = true)]
    pub alphas: Vec<f64>,

    #[arg(long, value_delimiter = ',', required = true)]
    pub betas: Vec<f64>,

    #[arg(long, default_value_t = 100)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub scenario: ScenarioId,

    #[arg(long, value_delimiter = ',', required = true)]
    pub sizes: Vec<usize>,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LoglikArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Fitting subset sizes, comma-separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub m: Vec<usize>,

    #[arg(long, value_parser = parse_support, default_value = "estimate")]
    pub support: SupportPolicy,

    #[arg(long, default_value = "bayes")]
    pub selector: Selector,

    #[command(flatten)]
    pub prior: PriorArgs,

    #[arg(long, default_value_t = 100)]
    pub reps: usize,

    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    #[command(flatten)]
    #[serde(skip)]
    pub output: OutputArgs,
}

/// Points per axis; a single entry applies to every axis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GridSpec(pub Vec<usize>);

impl GridSpec {
    pub fn per_axis(&self, d: usize) -> Result<Vec<usize>, String> {
        match self.0.as_slice() {
            [m] => Ok(vec![*m; d]),
            v if v.len() == d => Ok(v.to_vec()),
            v => Err(format!("grid has {} axes but the data have {d} columns", v.len())),
        }
    }
}

pub fn parse_grid(s: &str) -> Result<GridSpec, String> {
    let v = s
        .split(['x', 'X'])
        .map(|p| match p.trim().parse::<usize>() {
            Ok(m) if m >= 2 => Ok(m),
            _ => Err(format!("grid entries must be integers ≥ 2, got {p:?}")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GridSpec(v))
}

pub fn parse_support(s: &str) -> Result<SupportPolicy, String> {
    match s.trim() {
        "sample-range" => return Ok(SupportPolicy::sample_range()),
        "estimate" => return Ok(SupportPolicy::estimated()),
        _ => {}
    }
    let bounds = s
        .split(',')
        .map(|axis| {
            let (a, b) = axis
                .split_once(':')
                .ok_or_else(|| format!("expected a:b, sample-range or estimate, got {axis:?}"))?;
            let parse = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad bound {t:?}"));
            Ok((parse(a)?, parse(b)?))
        })
        .collect::<Result<Vec<_>, String>>()?;
    Support::from_bounds(&bounds)
        .map(SupportPolicy::given)
        .map_err(|e| e.to_string())
}
