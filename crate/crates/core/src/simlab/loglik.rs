//! Cross-validated average log-likelihood on real data: fit on a random
//! subset of size `m`, score the mean log density of the remaining points.

use rand::seq::index::sample as index_sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::replications::{mean_sd, select_bandwidths, Selector};
use crate::bandwidth::{AlphaChoice, PriorConfig, UcvSettings};
use crate::estimator::{DensityEstimate, Normalization, Sample};
use crate::error::{param_err, Error, Result};
use crate::numerics::rng::stream;
use crate::support::SupportPolicy;

pub const DEFAULT_LOG_FLOOR: f64 = -690.775_527_898_213_7; // ln 1e-300

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoglikConfig {
    pub selector: Selector,
    /// Resolved against the full sample size, not the subset size.
    pub alpha: AlphaChoice,
    pub beta: f64,
    pub support: SupportPolicy,
    pub subset_sizes: Vec<usize>,
    pub reps: usize,
    pub seed: u64,
    /// Log density credited to a held-out point outside the fitted support.
    pub log_floor: f64,
    #[serde(default)]
    pub ucv: UcvSettings,
}

impl LoglikConfig {
    pub fn new(selector: Selector, beta: f64, support: SupportPolicy, subset_sizes: Vec<usize>, reps: usize, seed: u64) -> Self {
        LoglikConfig {
            selector,
            alpha: AlphaChoice::Auto,
            beta,
            support,
            subset_sizes,
            reps,
            seed,
            log_floor: DEFAULT_LOG_FLOOR,
            ucv: UcvSettings::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoglikRow {
    pub m: usize,
    pub mean: f64,
    pub sd: f64,
    /// Held-out points scored with the floor, summed over replications.
    pub floored_points: usize,
    pub failures: usize,
}

struct RepScore {
    score: f64,
    floored: usize,
}

fn one_rep(data: &[f64], d: usize, m: usize, prior: &PriorConfig, cfg: &LoglikConfig, stream_index: u64) -> Result<RepScore> {
    let n = data.len() / d;
    let mut rng = stream(cfg.seed, stream_index);
    let mut held_in = vec![false; n];
    for i in index_sample(&mut rng, n, m) {
        held_in[i] = true;
    }
    let fit_rows: Vec<f64> = (0..n).filter(|&i| held_in[i]).flat_map(|i| data[i * d..(i + 1) * d].iter().copied()).collect();
    let support = cfg.support.resolve(&fit_rows, d, Some(prior))?;
    let sample = Sample::new(fit_rows, support)?;
    let bw = select_bandwidths(&sample, cfg.selector, prior, &cfg.ucv)?;
    let est = DensityEstimate::new(sample, bw, Normalization::Normalized)?;

    let mut total = 0.0;
    let mut floored = 0;
    for i in (0..n).filter(|&i| !held_in[i]) {
        let x = &data[i * d..(i + 1) * d];
        let log_f = match est.eval(x) {
            Ok(f) if f > 0.0 => f.ln(),
            Ok(_) | Err(Error::Domain(_)) => {
                floored += 1;
                cfg.log_floor
            }
            Err(e) => return Err(e),
        };
        total += log_f;
    }
    Ok(RepScore {
        score: total / (n - m) as f64,
        floored,
    })
}

/// One row per subset size. Replication `r` of the `k`-th size uses stream
/// `k * 2^32 + r` of the seed.
pub fn avg_loglik_crossval(data: &[f64], d: usize, cfg: &LoglikConfig) -> Result<Vec<LoglikRow>> {
    if d == 0 || data.is_empty() || !data.len().is_multiple_of(d) {
        return Err(Error::Data("data do not form complete rows".into()));
    }
    if cfg.reps == 0 {
        return param_err("need at least one replication");
    }
    let n = data.len() / d;
    if let Some(&m) = cfg.subset_sizes.iter().find(|&&m| m < 2 || m >= n) {
        return param_err(format!("subset size {m} must lie in [2, {})", n));
    }
    let prior = PriorConfig::new(cfg.alpha.resolve(n), vec![cfg.beta; d])?;
    let mut rows = Vec::with_capacity(cfg.subset_sizes.len());
    for (k, &m) in cfg.subset_sizes.iter().enumerate() {
        let results: Vec<Result<RepScore>> = (0..cfg.reps)
            .into_par_iter()
            .map(|r| one_rep(data, d, m, &prior, cfg, ((k as u64) << 32) + r as u64))
            .collect();
        let mut scores = Vec::with_capacity(cfg.reps);
        let mut floored_points = 0;
        let mut failures = 0;
        for (r, res) in results.into_iter().enumerate() {
            match res {
                Ok(s) => {
                    scores.push(s.score);
                    floored_points += s.floored;
                }
                Err(e) => {
                    log::warn!("loglik m={m} replication {r} failed: {e}");
                    failures += 1;
                }
            }
        }
        if floored_points > 0 {
            log::warn!("loglik m={m}: {floored_points} held-out points outside the fitted support");
        }
        let (mean, sd) = mean_sd(&scores);
        rows.push(LoglikRow {
            m,
            mean,
            sd,
            floored_points,
            failures,
        });
    }
    Ok(rows)
}
