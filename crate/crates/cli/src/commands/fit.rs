use mebk::bandwidth::{ucv_select, UcvSettings};
use mebk::{
    bayes_adaptive_bandwidths, BandwidthVector, Bandwidths, CubatureSpec, DensityEstimate, Normalization, PriorConfig,
    Sample, Support, SupportMode,
};
use serde::{Deserialize, Serialize};

use super::{cubature_for, load_data, prior_for};
use crate::args::{FitArgs, FitSelector, GridArgs, GridSpec};
use crate::error::{CliError, CliResult};
use crate::output::{csv_table, emit, json_text, Document, Provenance};

/// Grids larger than this are refused.
const MAX_GRID_POINTS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisSummary {
    pub column: String,
    pub a: f64,
    pub b: f64,
    pub h_min: f64,
    pub h_median: f64,
    pub h_mean: f64,
    pub h_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcvOutcome {
    pub value: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Everything needed to re-evaluate a fitted estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub columns: Vec<String>,
    pub support: Support,
    pub selector: FitSelector,
    pub prior: Option<PriorConfig>,
    pub normalization: Normalization,
    pub c_n: f64,
    pub cubature: CubatureSpec,
    pub grid: GridSpec,
    pub summary: Vec<AxisSummary>,
    pub ucv: Option<UcvOutcome>,
    pub bandwidths: Bandwidths,
    pub sample: Sample,
}

impl Model {
    pub fn estimate(&self) -> CliResult<DensityEstimate> {
        let est = DensityEstimate::with_cubature(self.sample.clone(), self.bandwidths.clone(), self.normalization, self.cubature)?;
        Ok(est.with_known_normalization(self.c_n)?)
    }
}

pub fn summarize(columns: &[String], sample: &Sample, bw: &Bandwidths) -> Vec<AxisSummary> {
    (0..sample.d())
        .map(|j| {
            let mut h: Vec<f64> = (0..sample.n()).map(|i| bw.row(i)[j]).collect();
            h.sort_by(f64::total_cmp);
            let k = h.len();
            let median = if k % 2 == 1 { h[k / 2] } else { 0.5 * (h[k / 2 - 1] + h[k / 2]) };
            let iv = sample.support().axis(j);
            AxisSummary {
                column: columns[j].clone(),
                a: iv.a(),
                b: iv.b(),
                h_min: h[0],
                h_median: median,
                h_mean: h.iter().sum::<f64>() / k as f64,
                h_max: h[k - 1],
            }
        })
        .collect()
}

pub fn run_ucv(sample: &Sample, cubature: &CubatureSpec) -> CliResult<(Bandwidths, UcvOutcome)> {
    let sel = ucv_select(sample, cubature, &UcvSettings::default())?;
    let outcome = UcvOutcome {
        value: sel.value,
        converged: sel.converged,
        warnings: sel.warnings,
    };
    Ok((Bandwidths::Global(sel.h), outcome))
}

pub fn run_fit(args: &FitArgs) -> CliResult<()> {
    let table = load_data(&args.data)?;
    let (n, d) = (table.n, table.d());
    let needs_prior = args.selector == FitSelector::Bayes || matches!(args.support.mode, SupportMode::Estimated);
    let prior = if needs_prior { Some(prior_for(&args.prior, n, d)?) } else { None };
    let support = args.support.resolve(&table.data, d, prior.as_ref())?;
    let sample = Sample::new(table.data, support.clone())?;
    let cubature = cubature_for(d, args.seed);
    let grid = GridSpec(args.grid.per_axis(d).map_err(CliError::Validation)?);
    grid_size(&grid.0)?;

    let (bandwidths, ucv) = match args.selector {
        FitSelector::Bayes => {
            let p = prior.as_ref().expect("prior built for the Bayes selector");
            (Bandwidths::Adaptive(bayes_adaptive_bandwidths(&sample, p)?), None)
        }
        FitSelector::Ucv => {
            let (bw, outcome) = run_ucv(&sample, &cubature)?;
            (bw, Some(outcome))
        }
        FitSelector::Fixed => {
            let h = match args.h.as_slice() {
                [] => return Err(CliError::validation("--selector fixed needs --h")),
                [h] => vec![*h; d],
                h if h.len() == d => h.to_vec(),
                h => return Err(CliError::validation(format!("--h has {} values for {d} columns", h.len()))),
            };
            (Bandwidths::Global(BandwidthVector::new(h)?), None)
        }
    };
    let c_n = DensityEstimate::with_cubature(sample.clone(), bandwidths.clone(), Normalization::Raw, cubature)?
        .normalization_constant()?;
    let model = Model {
        summary: summarize(&table.names, &sample, &bandwidths),
        columns: table.names,
        support,
        selector: args.selector,
        prior: if args.selector == FitSelector::Bayes { prior } else { None },
        normalization: args.normalization.into(),
        c_n,
        cubature,
        grid,
        ucv,
        bandwidths,
        sample,
    };
    let provenance = Provenance::new("fit", args.seed, args)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|source| CliError::Output {
        path: args.out_dir.clone(),
        source,
    })?;
    emit(&json_text(&provenance, &model)?, Some(&args.out_dir.join("model.json")))?;
    emit(&grid_csv(&provenance, &model, &model.grid)?, Some(&args.out_dir.join("density.csv")))
}

pub fn run_grid(args: &GridArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.model)
        .map_err(|e| CliError::validation(format!("{}: {e}", args.model.display())))?;
    let doc: Document<Model> = serde_json::from_str(&text)
        .map_err(|e| CliError::validation(format!("{}: not a model file: {e}", args.model.display())))?;
    let grid = match &args.grid {
        Some(g) => GridSpec(g.per_axis(doc.result.sample.d()).map_err(CliError::Validation)?),
        None => doc.result.grid.clone(),
    };
    grid_size(&grid.0)?;
    emit(&grid_csv(&doc.provenance, &doc.result, &grid)?, args.out.as_deref())
}

fn grid_size(per_axis: &[usize]) -> CliResult<usize> {
    per_axis
        .iter()
        .try_fold(1usize, |acc, &m| acc.checked_mul(m))
        .filter(|&t| t <= MAX_GRID_POINTS)
        .ok_or_else(|| CliError::validation(format!("grid {per_axis:?} exceeds {MAX_GRID_POINTS} points")))
}

/// Equally spaced points on each support axis, endpoints included.
pub fn grid_axes(support: &Support, per_axis: &[usize]) -> Vec<Vec<f64>> {
    support
        .intervals()
        .iter()
        .zip(per_axis)
        .map(|(iv, &m)| {
            let step = iv.width() / (m - 1) as f64;
            (0..m)
                .map(|k| if k + 1 == m { iv.b() } else { iv.a() + k as f64 * step })
                .collect()
        })
        .collect()
}

fn grid_csv(provenance: &Provenance, model: &Model, grid: &GridSpec) -> CliResult<String> {
    let d = model.sample.d();
    let axes = grid_axes(model.sample.support(), &grid.0);
    let values = model.estimate()?.eval_grid(&axes)?;
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    header.push("density".into());
    let mut index = vec![0usize; d];
    let rows = values.iter().map(move |v| {
        let mut row: Vec<String> = index.iter().enumerate().map(|(j, &k)| axes[j][k].to_string()).collect();
        row.push(v.to_string());
        // Odometer, last axis fastest.
        for j in (0..d).rev() {
            index[j] += 1;
            if index[j] < axes[j].len() {
                break;
            }
            index[j] = 0;
        }
        row
    });
    csv_table(provenance, &header, rows)
}
