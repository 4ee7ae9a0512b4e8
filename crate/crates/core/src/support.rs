//! Choosing the estimation box: given, sample range, or the range extended
//! by the adaptive bandwidths of the extreme observations.

use serde::{Deserialize, Serialize};

use crate::bandwidth::{bayes_adaptive_bandwidths, PriorConfig};
use crate::ebkernel::Interval;
use crate::estimator::{AdaptiveBandwidths, Sample, Support};
use crate::error::{param_err, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum SupportMode {
    Given { support: Support },
    SampleRange,
    Estimated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportPolicy {
    pub mode: SupportMode,
    /// Per-axis `(below, above)` widening applied after the mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflation: Option<Vec<(f64, f64)>>,
}

impl SupportPolicy {
    pub fn given(support: Support) -> Self {
        SupportPolicy {
            mode: SupportMode::Given { support },
            inflation: None,
        }
    }

    pub fn sample_range() -> Self {
        SupportPolicy {
            mode: SupportMode::SampleRange,
            inflation: None,
        }
    }

    pub fn estimated() -> Self {
        SupportPolicy {
            mode: SupportMode::Estimated,
            inflation: None,
        }
    }

    /// Resolves the policy for row-major `data` with `d` columns.
    ///
    /// `prior` is only used by the estimated mode; `None` there means the
    /// default prior for the sample size.
    pub fn resolve(&self, data: &[f64], d: usize, prior: Option<&PriorConfig>) -> Result<Support> {
        let base = match &self.mode {
            SupportMode::Given { support } => {
                if support.dim() != d {
                    return param_err("given support dimension does not match the data");
                }
                support.clone()
            }
            SupportMode::SampleRange => sample_range(data, d)?,
            SupportMode::Estimated => {
                let n = data.len() / d.max(1);
                let default;
                let prior = match prior {
                    Some(p) => p,
                    None => {
                        default = PriorConfig::default_for(n, d, crate::bandwidth::DEFAULT_BETA)?;
                        &default
                    }
                };
                estimate_support(data, d, prior)?.support
            }
        };
        let support = match &self.inflation {
            None => base,
            Some(infl) => {
                if infl.len() != d {
                    return param_err("inflation needs one pair per axis");
                }
                let ivs = base
                    .intervals()
                    .iter()
                    .zip(infl)
                    .map(|(iv, &(lo, hi))| {
                        if !(lo >= 0.0 && hi >= 0.0) {
                            return param_err(format!("inflation must be nonnegative, got ({lo}, {hi})"));
                        }
                        Interval::new(iv.a() - lo, iv.b() + hi)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Support::new(ivs)?
            }
        };
        // Surfaces data outside a given box as a domain error.
        Sample::new(data.to_vec(), support.clone())?;
        Ok(support)
    }
}

/// Per-axis `[min, max]` of the data.
pub fn sample_range(data: &[f64], d: usize) -> Result<Support> {
    if d == 0 || data.is_empty() || !data.len().is_multiple_of(d) {
        return Err(Error::Data("data do not form complete rows".into()));
    }
    let n = data.len() / d;
    let ivs = (0..d)
        .map(|j| {
            let (lo, hi) = (0..n).map(|i| data[i * d + j]).fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            });
            if !(lo < hi) {
                return Err(Error::Data(format!("column {j} is constant or non-finite")));
            }
            Interval::new(lo, hi)
        })
        .collect::<Result<Vec<_>>>()?;
    Support::new(ivs)
}

/// Result of the two-stage support estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatedSupport {
    pub support: Support,
    /// Stage-one box (the sample range).
    pub range: Support,
    /// Stage-one bandwidths, computed on `range`.
    pub bandwidths: AdaptiveBandwidths,
}

/// Extends each axis of the sample range by the Bayes bandwidth of the
/// observation attaining the minimum (resp. maximum), lowest index on ties.
pub fn estimate_support(data: &[f64], d: usize, prior: &PriorConfig) -> Result<EstimatedSupport> {
    let range = sample_range(data, d)?;
    let sample = Sample::new(data.to_vec(), range.clone())?;
    if sample.n() < 2 {
        return param_err("support estimation needs at least two observations");
    }
    let bw = bayes_adaptive_bandwidths(&sample, prior)?;
    let ivs = (0..d)
        .map(|j| {
            let col = sample.column(j);
            let mut i_min = 0;
            let mut i_max = 0;
            for (i, v) in col.iter().enumerate() {
                if *v < col[i_min] {
                    i_min = i;
                }
                if *v > col[i_max] {
                    i_max = i;
                }
            }
            Interval::new(col[i_min] - bw.row(i_min)[j], col[i_max] + bw.row(i_max)[j])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EstimatedSupport {
        support: Support::new(ivs)?,
        range,
        bandwidths: bw,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn two_point_support_uses_prior_mean_margins() {
        // Each extreme sits on one end of the range and its only donor on the
        // other, where the boundary scale is infinite; both rows fall back to
        // the prior mean beta/(alpha - 1).
        let prior = PriorConfig::new(4.0, vec![0.25]).unwrap();
        let est = estimate_support(&[3.0, 1.0], 1, &prior).unwrap();
        let m = 0.25 / 3.0;
        assert_relative_eq!(est.support.axis(0).a(), 1.0 - m, epsilon = 1e-15);
        assert_relative_eq!(est.support.axis(0).b(), 3.0 + m, epsilon = 1e-15);
    }

    #[test]
    fn three_point_margins_match_boundary_formula() {
        let (alpha, beta) = (4.0f64, 0.25f64);
        let prior = PriorConfig::new(alpha, vec![beta]).unwrap();
        let est = estimate_support(&[1.0, 2.0, 3.0], 1, &prior).unwrap();
        // Lower extreme: donors at t = 1/2 (E = beta + ln 2) and t = 1 (weight 0).
        let e = beta + 2f64.ln();
        let f = e.powf(-alpha) * crate::numerics::ln_gamma(alpha).exp();
        let h = e.powf(-alpha - 1.0) * crate::numerics::ln_gamma(alpha + 1.0).exp();
        let expected = (f / (alpha - 1.0) + h / alpha) * e / (f + h);
        assert_relative_eq!(est.support.axis(0).a(), 1.0 - expected, epsilon = 1e-14);
        assert_relative_eq!(est.support.axis(0).b(), 3.0 + expected, epsilon = 1e-14);
    }

    #[test]
    fn estimated_support_strictly_contains_range() {
        let data: Vec<f64> = (0..40).map(|k| ((k * 37) % 41) as f64 / 7.0).collect();
        let prior = PriorConfig::default_for(20, 2, 0.25).unwrap();
        let est = estimate_support(&data, 2, &prior).unwrap();
        for j in 0..2 {
            assert!(est.support.axis(j).a() < est.range.axis(j).a());
            assert!(est.support.axis(j).b() > est.range.axis(j).b());
        }
    }

    #[test]
    fn constant_column_is_rejected() {
        assert!(sample_range(&[1.0, 2.0, 1.0, 3.0], 2).is_err());
    }

    #[test]
    fn given_policy_rejects_outside_data() {
        let sup = Support::from_bounds(&[(0.0, 1.0)]).unwrap();
        let pol = SupportPolicy::given(sup);
        assert!(matches!(pol.resolve(&[0.5, 1.5], 1, None), Err(Error::Domain(_))));
        let mut pol = SupportPolicy::sample_range();
        pol.inflation = Some(vec![(0.5, 0.25)]);
        let s = pol.resolve(&[1.0, 2.0, 1.5], 1, None).unwrap();
        assert_eq!(s.axis(0), Interval::new(0.5, 2.25).unwrap());
    }
}
