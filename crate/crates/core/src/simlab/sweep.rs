//! Sensitivity of the Bayesian selector to the prior hyperparameters.

use serde::{Deserialize, Serialize};

use super::replications::{run_ise_replications, ReplicationConfig, ReplicationReport, Selector};
use super::scenarios::ScenarioId;
use crate::bandwidth::AlphaChoice;
use crate::error::{param_err, Result};

/// One cell of the sweep table; ISE figures are scaled by 1000.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub scenario: ScenarioId,
    pub n: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mean_ise_x1000: f64,
    pub sd_x1000: f64,
    pub failures: usize,
}

impl SweepRow {
    pub fn from_report(report: &ReplicationReport) -> Self {
        SweepRow {
            scenario: report.scenario,
            n: report.n,
            alpha: report.alpha,
            beta: report.beta,
            mean_ise_x1000: 1000.0 * report.mean,
            sd_x1000: 1000.0 * report.sd,
            failures: report.failures.len(),
        }
    }
}

/// Bayes-selector ISE over the `alphas × betas` grid, alpha varying fastest
/// within each beta. Every cell reuses `seed`, so cells see the same samples
/// whenever the support does not depend on the prior.
pub fn sensitivity_sweep(
    scenario: ScenarioId,
    n: usize,
    alphas: &[f64],
    betas: &[f64],
    reps: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if alphas.is_empty() || betas.is_empty() {
        return param_err("sweep needs at least one alpha and one beta");
    }
    let mut rows = Vec::with_capacity(alphas.len() * betas.len());
    for &beta in betas {
        for &alpha in alphas {
            let cfg = ReplicationConfig::new(scenario, n, Selector::Bayes, AlphaChoice::Fixed(alpha), beta, reps, seed);
            rows.push(SweepRow::from_report(&run_ise_replications(&cfg)?));
        }
    }
    Ok(rows)
}
