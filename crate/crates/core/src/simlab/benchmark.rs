//! Wall-clock comparison of the two selectors.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::replications::replication_sample;
use super::scenarios::ScenarioId;
use crate::bandwidth::{bayes_adaptive_bandwidths, ucv_select, PriorConfig, UcvSettings, DEFAULT_BETA};
use crate::error::{param_err, Result};
use crate::numerics::quadrature::CubatureSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub n: usize,
    pub t_ucv_s: f64,
    pub t_bayes_s: f64,
    /// Selected UCV bandwidth, first axis.
    pub h_ucv: f64,
    /// Mean Bayes bandwidth, first axis.
    pub h_bayes_mean: f64,
}

/// Times both selectors on one sample per size. Size `k` in the list draws
/// from stream `k` of `seed`; the prior is `alpha = n^(2/5)` with the default
/// scale.
pub fn cpu_benchmark(scenario: ScenarioId, sizes: &[usize], seed: u64) -> Result<Vec<BenchmarkRow>> {
    if sizes.iter().any(|&n| n < 2) {
        return param_err("benchmark sizes must be at least 2");
    }
    let d = scenario.dim();
    let spec = CubatureSpec::default_for(d);
    let settings = UcvSettings::default();
    let mut rows = Vec::with_capacity(sizes.len());
    for (k, &n) in sizes.iter().enumerate() {
        let prior = PriorConfig::default_for(n, d, DEFAULT_BETA)?;
        let sample = replication_sample(scenario, n, &scenario.support_policy(), &prior, seed, k as u64)?;

        let start = Instant::now();
        let ucv = ucv_select(&sample, &spec, &settings)?;
        let t_ucv_s = start.elapsed().as_secs_f64();

        let start = Instant::now();
        let bayes = bayes_adaptive_bandwidths(&sample, &prior)?;
        let t_bayes_s = start.elapsed().as_secs_f64();

        let col = bayes.column(0);
        rows.push(BenchmarkRow {
            n,
            t_ucv_s,
            t_bayes_s,
            h_ucv: ucv.h.as_slice()[0],
            h_bayes_mean: col.iter().sum::<f64>() / col.len() as f64,
        });
    }
    Ok(rows)
}
