//! Monte-Carlo replications of the integrated squared error.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ise::integrated_squared_error;
use super::scenarios::ScenarioId;
use crate::bandwidth::{bayes_adaptive_bandwidths, ucv_select, AlphaChoice, PriorConfig, UcvSettings};
use crate::estimator::{Bandwidths, Sample};
use crate::error::{param_err, Error, Result};
use crate::numerics::quadrature::CubatureSpec;
use crate::numerics::rng::stream;
use crate::support::SupportPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Ucv,
    Bayes,
}

impl std::str::FromStr for Selector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "ucv" => Ok(Selector::Ucv),
            "bayes" => Ok(Selector::Bayes),
            other => Err(Error::Parameter(format!("unknown selector {other:?}"))),
        }
    }
}

impl std::fmt::Display for Selector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Selector::Ucv => "ucv",
            Selector::Bayes => "bayes",
        })
    }
}

/// Bandwidths chosen by `selector` for `sample`.
pub fn select_bandwidths(
    sample: &Sample,
    selector: Selector,
    prior: &PriorConfig,
    ucv: &UcvSettings,
) -> Result<Bandwidths> {
    match selector {
        Selector::Bayes => Ok(Bandwidths::Adaptive(bayes_adaptive_bandwidths(sample, prior)?)),
        Selector::Ucv => {
            let spec = CubatureSpec::default_for(sample.d());
            Ok(Bandwidths::Global(ucv_select(sample, &spec, ucv)?.h))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationConfig {
    pub scenario: ScenarioId,
    pub n: usize,
    pub selector: Selector,
    pub alpha: AlphaChoice,
    /// Prior scale shared by every axis.
    pub beta: f64,
    pub reps: usize,
    pub seed: u64,
    #[serde(default)]
    pub ucv: UcvSettings,
    /// Replaces the scenario's own estimation support policy.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportPolicy>,
}

impl ReplicationConfig {
    pub fn new(scenario: ScenarioId, n: usize, selector: Selector, alpha: AlphaChoice, beta: f64, reps: usize, seed: u64) -> Self {
        ReplicationConfig {
            scenario,
            n,
            selector,
            alpha,
            beta,
            reps,
            seed,
            ucv: UcvSettings::default(),
            support: None,
        }
    }

    pub fn support_policy(&self) -> SupportPolicy {
        self.support.clone().unwrap_or_else(|| self.scenario.support_policy())
    }

    pub fn prior(&self) -> Result<PriorConfig> {
        PriorConfig::new(self.alpha.resolve(self.n), vec![self.beta; self.scenario.dim()])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationFailure {
    pub replication: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub scenario: ScenarioId,
    pub n: usize,
    pub selector: Selector,
    pub alpha: f64,
    pub beta: f64,
    pub reps: usize,
    pub seed: u64,
    /// Errors of the successful replications, in replication order.
    pub ise: Vec<f64>,
    pub c_n: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
    pub failures: Vec<ReplicationFailure>,
    /// Wall-clock seconds; kept out of serialized output so reruns compare equal.
    #[serde(skip)]
    pub elapsed_s: f64,
}

/// Draws one replication's sample from stream `index` of `seed` and resolves
/// its estimation support.
pub fn replication_sample(
    scenario: ScenarioId,
    n: usize,
    policy: &SupportPolicy,
    prior: &PriorConfig,
    seed: u64,
    index: u64,
) -> Result<Sample> {
    let mut rng = stream(seed, index);
    let data = scenario.draw_many(n, &mut rng)?;
    let support = policy.resolve(&data, scenario.dim(), Some(prior))?;
    Sample::new(data, support)
}

/// Mean and sample standard deviation.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, var.sqrt())
}

fn one_replication(cfg: &ReplicationConfig, policy: &SupportPolicy, prior: &PriorConfig, index: usize) -> Result<(f64, f64)> {
    let sample = replication_sample(cfg.scenario, cfg.n, policy, prior, cfg.seed, index as u64)?;
    let bw = select_bandwidths(&sample, cfg.selector, prior, &cfg.ucv)?;
    let out = integrated_squared_error(cfg.scenario, &sample, &bw)?;
    Ok((out.ise, out.c_n))
}

/// Runs `cfg.reps` independent replications; replication `r` uses stream `r`
/// of `cfg.seed`. Failed replications are recorded, not fatal.
pub fn run_ise_replications(cfg: &ReplicationConfig) -> Result<ReplicationReport> {
    if cfg.reps == 0 {
        return param_err("need at least one replication");
    }
    if cfg.n < 2 {
        return param_err("need at least two observations per replication");
    }
    let prior = cfg.prior()?;
    let policy = cfg.support_policy();
    let start = Instant::now();
    let results: Vec<Result<(f64, f64)>> = (0..cfg.reps)
        .into_par_iter()
        .map(|r| one_replication(cfg, &policy, &prior, r))
        .collect();
    let elapsed_s = start.elapsed().as_secs_f64();
    let mut ise = Vec::with_capacity(cfg.reps);
    let mut c_n = Vec::with_capacity(cfg.reps);
    let mut failures = Vec::new();
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok((e, c)) => {
                ise.push(e);
                c_n.push(c);
            }
            Err(err) => {
                log::warn!("replication {r} failed: {err}");
                failures.push(ReplicationFailure {
                    replication: r,
                    message: err.to_string(),
                });
            }
        }
    }
    let (mean, sd) = mean_sd(&ise);
    Ok(ReplicationReport {
        scenario: cfg.scenario,
        n: cfg.n,
        selector: cfg.selector,
        alpha: prior.alpha(),
        beta: cfg.beta,
        reps: cfg.reps,
        seed: cfg.seed,
        ise,
        c_n,
        mean,
        sd,
        failures,
        elapsed_s,
    })
}
