use mebk::simlab::loglik::{avg_loglik_crossval, LoglikConfig};
use mebk::simlab::Selector;
use mebk::{bayes_adaptive_bandwidths, Bandwidths, PriorConfig, Sample, Support, SupportMode};
use serde::Serialize;

use super::fit::{run_ucv, summarize, AxisSummary, UcvOutcome};
use super::{cubature_for, load_data, prior_for};
use crate::args::{BandwidthArgs, DataArgs, LoglikArgs};
use crate::error::CliResult;
use crate::output::{csv_records, csv_table, emit, render, Provenance};

#[derive(Debug, Serialize)]
struct BandwidthReport {
    columns: Vec<String>,
    support: Support,
    selector: Selector,
    prior: Option<PriorConfig>,
    summary: Vec<AxisSummary>,
    ucv: Option<UcvOutcome>,
    bandwidths: Bandwidths,
}

pub fn run_bandwidth(args: &BandwidthArgs) -> CliResult<()> {
    let table = load_data(&args.data)?;
    let (n, d) = (table.n, table.d());
    let needs_prior = args.selector == Selector::Bayes || matches!(args.support.mode, SupportMode::Estimated);
    let prior = if needs_prior { Some(prior_for(&args.prior, n, d)?) } else { None };
    let support = args.support.resolve(&table.data, d, prior.as_ref())?;
    let sample = Sample::new(table.data, support.clone())?;
    let (bandwidths, ucv) = match args.selector {
        Selector::Bayes => {
            let p = prior.as_ref().expect("prior built for the Bayes selector");
            (Bandwidths::Adaptive(bayes_adaptive_bandwidths(&sample, p)?), None)
        }
        Selector::Ucv => {
            let (bw, outcome) = run_ucv(&sample, &cubature_for(d, 1))?;
            (bw, Some(outcome))
        }
    };
    let report = BandwidthReport {
        summary: summarize(&table.names, &sample, &bandwidths),
        columns: table.names,
        support,
        selector: args.selector,
        prior: if args.selector == Selector::Bayes { prior } else { None },
        ucv,
        bandwidths,
    };
    let provenance = Provenance::new("bandwidth", 0, args)?;
    let csv = || {
        let mut header: Vec<String> = report.columns.iter().map(|c| format!("h_{c}")).collect();
        match &report.bandwidths {
            Bandwidths::Global(h) => csv_table(&provenance, &header, [h.as_slice().iter().map(f64::to_string).collect()]),
            Bandwidths::Adaptive(a) => {
                header.insert(0, "row".into());
                let rows = (0..a.n()).map(|i| {
                    std::iter::once(i.to_string())
                        .chain(a.row(i).iter().map(f64::to_string))
                        .collect()
                });
                csv_table(&provenance, &header, rows)
            }
        }
    };
    let text = render(args.output.format, &provenance, csv, &report)?;
    emit(&text, args.output.out.as_deref())
}

#[derive(Serialize)]
struct LoglikRun<'a> {
    data: &'a DataArgs,
    #[serde(flatten)]
    config: &'a LoglikConfig,
}

pub fn run_loglik(args: &LoglikArgs) -> CliResult<()> {
    let table = load_data(&args.data)?;
    let mut cfg = LoglikConfig::new(args.selector, args.prior.beta, args.support.clone(), args.m.clone(), args.reps, args.seed);
    cfg.alpha = args.prior.alpha;
    let rows = avg_loglik_crossval(&table.data, table.d(), &cfg)?;
    let provenance = Provenance::new("loglik", args.seed, &LoglikRun { data: &args.data, config: &cfg })?;
    let text = render(args.output.format, &provenance, || csv_records(&provenance, &rows), &rows)?;
    emit(&text, args.output.out.as_deref())
}
