//! Shared fixtures for the criterion benches.

use mebk::simlab::{scenario_sample, ScenarioId};
use mebk::{PriorConfig, Sample};

/// Fixed-seed scenario sample so every run times the same input.
pub fn fixture(id: ScenarioId, n: usize) -> Sample {
    scenario_sample(id, n, 2024).expect("scenario sample")
}

/// The default prior for `sample`.
pub fn default_prior(sample: &Sample) -> PriorConfig {
    PriorConfig::default_for(sample.n(), sample.d(), mebk::bandwidth::DEFAULT_BETA).expect("default prior")
}

/// `m` equally spaced points per support axis.
pub fn grid_axes(sample: &Sample, m: usize) -> Vec<Vec<f64>> {
    sample
        .support()
        .intervals()
        .iter()
        .map(|iv| (0..m).map(|k| iv.a() + iv.width() * (k as f64 + 0.5) / m as f64).collect())
        .collect()
}
