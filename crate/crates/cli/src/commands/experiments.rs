use mebk::simlab::{cpu_benchmark, run_ise_replications, sensitivity_sweep, ReplicationConfig, ScenarioId, Selector};
use serde::Serialize;

use crate::args::{BenchmarkArgs, SimulateArgs, SweepArgs};
use crate::error::CliResult;
use crate::output::{csv_records, emit, render, Provenance};

/// One-line digest of a replication run.
#[derive(Debug, Serialize)]
struct SimulateSummary {
    scenario: ScenarioId,
    n: usize,
    selector: Selector,
    alpha: f64,
    beta: f64,
    reps: usize,
    mean_ise: f64,
    sd_ise: f64,
    failures: usize,
}

pub fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let mut cfg = ReplicationConfig::new(args.scenario, args.n, args.selector, args.prior.alpha, args.prior.beta, args.reps, args.seed);
    cfg.support = args.support.clone();
    let report = run_ise_replications(&cfg)?;
    log::info!("{} replications in {:.2} s", report.reps, report.elapsed_s);
    let provenance = Provenance::new("simulate", args.seed, &cfg)?;
    let summary = SimulateSummary {
        scenario: report.scenario,
        n: report.n,
        selector: report.selector,
        alpha: report.alpha,
        beta: report.beta,
        reps: report.reps,
        mean_ise: report.mean,
        sd_ise: report.sd,
        failures: report.failures.len(),
    };
    let text = render(args.output.format, &provenance, || csv_records(&provenance, &[summary]), &report)?;
    emit(&text, args.output.out.as_deref())
}

pub fn run_sweep(args: &SweepArgs) -> CliResult<()> {
    let rows = sensitivity_sweep(args.scenario, args.n, &args.alphas, &args.betas, args.reps, args.seed)?;
    let provenance = Provenance::new("sweep", args.seed, args)?;
    let text = render(args.output.format, &provenance, || csv_records(&provenance, &rows), &rows)?;
    emit(&text, args.output.out.as_deref())
}

pub fn run_benchmark(args: &BenchmarkArgs) -> CliResult<()> {
    let rows = cpu_benchmark(args.scenario, &args.sizes, args.seed)?;
    let provenance = Provenance::new("benchmark", args.seed, args)?;
    let text = render(args.output.format, &provenance, || csv_records(&provenance, &rows), &rows)?;
    emit(&text, args.output.out.as_deref())
}
