//! Bandwidth selectors: closed-form Bayesian per-observation bandwidths
//! under inverse-gamma priors, and global unbiased cross-validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::estimator::{leave_one_out_sum, raw_eval_cubature, BandwidthVector, Bandwidths, Sample, AdaptiveBandwidths};
use crate::error::{param_err, Error, Result};
use crate::numerics::optimize::{nelder_mead_min, NelderMeadSettings, PositiveBounds};
use crate::numerics::quadrature::CubatureSpec;
use crate::numerics::special::{ln_gamma, NeumaierSum};

/// Points within this fraction of the axis width of an endpoint count as on it.
pub const BOUNDARY_TOLERANCE: f64 = 1e-12;

/// Default prior scale used when none is given.
pub const DEFAULT_BETA: f64 = 0.25;

/// Inverse-gamma prior `IG(alpha, beta_l)` on each bandwidth component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriorConfig {
    alpha: f64,
    beta: Vec<f64>,
}

impl PriorConfig {
    pub fn new(alpha: f64, beta: Vec<f64>) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 1.5) {
            return param_err(format!("prior shape alpha must exceed 3/2, got {alpha}"));
        }
        if beta.is_empty() || beta.iter().any(|b| !(b.is_finite() && *b > 0.0)) {
            return param_err(format!("prior scales must be positive, got {beta:?}"));
        }
        Ok(PriorConfig { alpha, beta })
    }

    /// `alpha = n^{2/5}` with the same `beta` on every axis.
    pub fn default_for(n: usize, d: usize, beta: f64) -> Result<Self> {
        PriorConfig::new(AlphaChoice::Auto.resolve(n), vec![beta; d])
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn dim(&self) -> usize {
        self.beta.len()
    }

    /// Prior mean `beta_m / (alpha - 1)`.
    pub fn prior_mean(&self, m: usize) -> f64 {
        self.beta[m] / (self.alpha - 1.0)
    }
}

/// How the prior shape is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaChoice {
    /// `n^{2/5}`.
    Auto,
    Fixed(f64),
}

impl AlphaChoice {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            AlphaChoice::Auto => (n as f64).powf(0.4),
            AlphaChoice::Fixed(a) => a,
        }
    }
}

impl std::str::FromStr for AlphaChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(AlphaChoice::Auto);
        }
        s.parse::<f64>()
            .map(AlphaChoice::Fixed)
            .map_err(|_| Error::Parameter(format!("alpha must be 'auto' or a number, got {s:?}")))
    }
}

/// Where an observation sits on one axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisPosition {
    Lower,
    Interior,
    Upper,
}

fn classify(x: f64, a: f64, b: f64) -> AxisPosition {
    let tol = BOUNDARY_TOLERANCE * (b - a);
    if (x - a).abs() <= tol {
        AxisPosition::Lower
    } else if (b - x).abs() <= tol {
        AxisPosition::Upper
    } else {
        AxisPosition::Interior
    }
}

/// Posterior mixture coefficients for one (observation, donor, axis).
///
/// The axis posterior is proportional to
/// `first * IG(s1, scale)(h) + second * IG(s2, scale)(h)` where
/// `(s1, s2)` is `(alpha + 1/2, alpha - 1/2)` on interior axes and
/// `(alpha, alpha + 1)` on boundary axes. Coefficients are kept as logs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisCoefficients {
    pub position: AxisPosition,
    /// `B` on interior axes, `E` on lower and `G` on upper boundary axes.
    pub scale: f64,
    /// `ln A`, `ln F` or `ln J`.
    pub log_first: f64,
    /// `ln C`, `ln H` or `ln K`.
    pub log_second: f64,
}

impl AxisCoefficients {
    /// Inverse-gamma shapes paired with `first` and `second`.
    pub fn shapes(&self, alpha: f64) -> (f64, f64) {
        match self.position {
            AxisPosition::Interior => (alpha + 0.5, alpha - 0.5),
            AxisPosition::Lower | AxisPosition::Upper => (alpha, alpha + 1.0),
        }
    }

    /// `ln(first + second)`: the donor's mass on this axis.
    pub fn log_mass(&self) -> f64 {
        log_add_exp(self.log_first, self.log_second)
    }

    /// Posterior mean of `h` on this axis given this donor.
    pub fn mean(&self, alpha: f64) -> f64 {
        let (s1, s2) = self.shapes(alpha);
        let lm = self.log_mass();
        let w1 = (self.log_first - lm).exp();
        let w2 = (self.log_second - lm).exp();
        self.scale * (w1 / (s1 - 1.0) + w2 / (s2 - 1.0))
    }

    /// `ln[first * IG(s1, scale)(h) + second * IG(s2, scale)(h)]`.
    pub fn log_component_density(&self, alpha: f64, h: f64) -> f64 {
        let (s1, s2) = self.shapes(alpha);
        log_add_exp(
            self.log_first + log_inverse_gamma(s1, self.scale, h),
            self.log_second + log_inverse_gamma(s2, self.scale, h),
        )
    }
}

/// Coefficients for observation `i` against donor `j`, all axes.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorCoefficients {
    pub i: usize,
    pub j: usize,
    pub axes: Vec<AxisCoefficients>,
}

impl PosteriorCoefficients {
    /// `ln Π_l (first_l + second_l)`: the donor's weight in the mixture.
    pub fn log_weight(&self) -> f64 {
        self.axes.iter().map(AxisCoefficients::log_mass).sum()
    }
}

#[inline]
fn log_add_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + ((x - m).exp() + (y - m).exp()).ln()
}

/// `ln IG(shape, scale)(h)`.
pub fn log_inverse_gamma(shape: f64, scale: f64, h: f64) -> f64 {
    if !(h > 0.0) || !scale.is_finite() {
        return f64::NEG_INFINITY;
    }
    shape * scale.ln() - ln_gamma(shape) - (shape + 1.0) * h.ln() - scale / h
}

/// Per-axis constants reused across donors.
struct AxisLogs {
    a: f64,
    b: f64,
    ln_width: f64,
    /// `ln(X - a)` and `ln(b - X)` per observation.
    ln_lo: Vec<f64>,
    ln_hi: Vec<f64>,
}

struct Precomputed {
    axes: Vec<AxisLogs>,
    ln_beta: Vec<f64>,
    lg_half_up: f64,
    lg_half_down: f64,
    lg_alpha: f64,
    lg_alpha_up: f64,
}

impl Precomputed {
    fn new(sample: &Sample, prior: &PriorConfig) -> Self {
        let alpha = prior.alpha;
        let axes = (0..sample.d())
            .map(|l| {
                let iv = sample.support().axis(l);
                let col = sample.column(l);
                AxisLogs {
                    a: iv.a(),
                    b: iv.b(),
                    ln_width: iv.width().ln(),
                    ln_lo: col.iter().map(|x| (x - iv.a()).ln()).collect(),
                    ln_hi: col.iter().map(|x| (iv.b() - x).ln()).collect(),
                }
            })
            .collect();
        Precomputed {
            axes,
            ln_beta: prior.beta.iter().map(|b| b.ln()).collect(),
            lg_half_up: ln_gamma(alpha + 0.5),
            lg_half_down: ln_gamma(alpha - 0.5),
            lg_alpha: ln_gamma(alpha),
            lg_alpha_up: ln_gamma(alpha + 1.0),
        }
    }
}

fn axis_coefficients(
    pre: &Precomputed,
    prior: &PriorConfig,
    sample: &Sample,
    l: usize,
    pos: AxisPosition,
    i: usize,
    j: usize,
) -> AxisCoefficients {
    let alpha = prior.alpha;
    let beta = prior.beta[l];
    let ax = &pre.axes[l];
    let ab = alpha * pre.ln_beta[l];
    match pos {
        AxisPosition::Interior => {
            let xi = sample.row(i)[l];
            let t = (xi - ax.a) / (ax.b - ax.a);
            let kl = t * (ax.ln_lo[i] - ax.ln_lo[j]) + (1.0 - t) * (ax.ln_hi[i] - ax.ln_hi[j]);
            // Only rounding can make the divergence negative.
            let scale = beta + if kl.is_nan() { f64::INFINITY } else { kl.max(0.0) };
            let lc = -0.5 * ((2.0 * std::f64::consts::PI).ln() + ax.ln_lo[i] + ax.ln_hi[i]);
            let ls = scale.ln();
            AxisCoefficients {
                position: pos,
                scale,
                log_first: lc + ab - (alpha + 0.5) * ls + pre.lg_half_up,
                log_second: lc + ab - (alpha - 0.5) * ls + pre.lg_half_down,
            }
        }
        AxisPosition::Lower | AxisPosition::Upper => {
            let ln_ratio = if pos == AxisPosition::Lower {
                ax.ln_hi[j] - ax.ln_width
            } else {
                ax.ln_lo[j] - ax.ln_width
            };
            let scale = beta - ln_ratio.min(0.0);
            let ls = scale.ln();
            AxisCoefficients {
                position: pos,
                scale,
                log_first: ab - ax.ln_width + pre.lg_alpha - alpha * ls,
                log_second: ab - ax.ln_width + pre.lg_alpha_up - (alpha + 1.0) * ls,
            }
        }
    }
}

fn positions(sample: &Sample, i: usize) -> Vec<AxisPosition> {
    let row = sample.row(i);
    (0..sample.d())
        .map(|l| {
            let iv = sample.support().axis(l);
            classify(row[l], iv.a(), iv.b())
        })
        .collect()
}

fn check_inputs(sample: &Sample, prior: &PriorConfig) -> Result<()> {
    if prior.dim() != sample.d() {
        return param_err(format!(
            "prior has {} scales for a {}-dimensional sample",
            prior.dim(),
            sample.d()
        ));
    }
    if sample.n() < 2 {
        return param_err("Bayesian bandwidths need at least two observations");
    }
    Ok(())
}

/// Coefficients of observation `i` against donor `j != i`.
pub fn posterior_coefficients(
    sample: &Sample,
    prior: &PriorConfig,
    i: usize,
    j: usize,
) -> Result<PosteriorCoefficients> {
    check_inputs(sample, prior)?;
    if i >= sample.n() || j >= sample.n() || i == j {
        return param_err(format!("invalid observation/donor pair ({i}, {j})"));
    }
    let pre = Precomputed::new(sample, prior);
    let pos = positions(sample, i);
    let axes = (0..sample.d())
        .map(|l| axis_coefficients(&pre, prior, sample, l, pos[l], i, j))
        .collect();
    Ok(PosteriorCoefficients { i, j, axes })
}

/// `ln D_i`, the mixture normalizer for observation `i`.
pub fn log_mixture_normalizer(sample: &Sample, prior: &PriorConfig, i: usize) -> Result<f64> {
    check_inputs(sample, prior)?;
    if i >= sample.n() {
        return param_err(format!("observation index {i} out of range"));
    }
    let pre = Precomputed::new(sample, prior);
    let pos = positions(sample, i);
    let lw: Vec<f64> = (0..sample.n())
        .filter(|&j| j != i)
        .map(|j| {
            (0..sample.d())
                .map(|l| axis_coefficients(&pre, prior, sample, l, pos[l], i, j).log_mass())
                .sum()
        })
        .collect();
    Ok(crate::numerics::special::log_sum_exp(&lw))
}

/// Row `i` of the Bayes bandwidths, or `None` when every donor has zero weight.
fn bayes_row(sample: &Sample, prior: &PriorConfig, pre: &Precomputed, i: usize) -> Option<Vec<f64>> {
    let d = sample.d();
    let pos = positions(sample, i);
    let mut log_w = Vec::with_capacity(sample.n() - 1);
    let mut means = Vec::with_capacity((sample.n() - 1) * d);
    for j in (0..sample.n()).filter(|&j| j != i) {
        let mut lw = 0.0;
        for l in 0..d {
            let c = axis_coefficients(pre, prior, sample, l, pos[l], i, j);
            lw += c.log_mass();
            means.push(if c.log_mass() == f64::NEG_INFINITY { 0.0 } else { c.mean(prior.alpha) });
        }
        log_w.push(lw);
    }
    let max = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return None;
    }
    let mut den = NeumaierSum::default();
    let mut num = vec![NeumaierSum::default(); d];
    for (k, lw) in log_w.iter().enumerate() {
        let w = (lw - max).exp();
        if w == 0.0 {
            continue;
        }
        den.add(w);
        for m in 0..d {
            num[m].add(w * means[k * d + m]);
        }
    }
    let den = den.total();
    Some(num.iter().map(|s| s.total() / den).collect())
}

/// Posterior-mean bandwidths for every observation.
///
/// Rows whose donors all carry zero weight fall back to the prior mean and
/// are reported through `log::warn!`.
pub fn bayes_adaptive_bandwidths(sample: &Sample, prior: &PriorConfig) -> Result<AdaptiveBandwidths> {
    check_inputs(sample, prior)?;
    let pre = Precomputed::new(sample, prior);
    let d = sample.d();
    let rows: Vec<Option<Vec<f64>>> = (0..sample.n())
        .into_par_iter()
        .map(|i| bayes_row(sample, prior, &pre, i))
        .collect();
    let mut h = Vec::with_capacity(sample.n() * d);
    for (i, row) in rows.into_iter().enumerate() {
        match row {
            Some(r) => h.extend(r),
            None => {
                log::warn!("observation {i}: no donor carries posterior weight; using the prior mean");
                h.extend((0..d).map(|m| prior.prior_mean(m)));
            }
        }
    }
    AdaptiveBandwidths::new(h, d)
}

/// Posterior density of the bandwidth vector of observation `i` at `h`.
pub fn posterior_density(sample: &Sample, prior: &PriorConfig, i: usize, h: &[f64]) -> Result<f64> {
    check_inputs(sample, prior)?;
    if i >= sample.n() {
        return param_err(format!("observation index {i} out of range"));
    }
    if h.len() != sample.d() {
        return param_err("bandwidth vector has the wrong dimension");
    }
    if h.iter().any(|v| !(*v > 0.0)) {
        return Ok(0.0);
    }
    let pre = Precomputed::new(sample, prior);
    let pos = positions(sample, i);
    let alpha = prior.alpha;
    let mut log_terms = Vec::with_capacity(sample.n() - 1);
    let mut log_weights = Vec::with_capacity(sample.n() - 1);
    for j in (0..sample.n()).filter(|&j| j != i) {
        let mut lt = 0.0;
        let mut lw = 0.0;
        for l in 0..sample.d() {
            let c = axis_coefficients(&pre, prior, sample, l, pos[l], i, j);
            lt += c.log_component_density(alpha, h[l]);
            lw += c.log_mass();
        }
        log_terms.push(lt);
        log_weights.push(lw);
    }
    let log_d = crate::numerics::special::log_sum_exp(&log_weights);
    if log_d == f64::NEG_INFINITY {
        let lp: f64 = (0..sample.d())
            .map(|l| log_inverse_gamma(alpha, prior.beta[l], h[l]))
            .sum();
        return Ok(lp.exp());
    }
    Ok((crate::numerics::special::log_sum_exp(&log_terms) - log_d).exp())
}

/// `∫ f̂² − (2/n) Σ_i f̂_{−i}(X_i)` for a global bandwidth.
pub fn ucv_objective(sample: &Sample, h: &BandwidthVector, cubature: &CubatureSpec) -> Result<f64> {
    if sample.n() < 2 {
        return param_err("cross-validation needs at least two observations");
    }
    let bw = Bandwidths::Global(h.clone());
    let pts = cubature.realize(sample.support().intervals())?;
    let values = raw_eval_cubature(sample, &bw, &pts)?;
    let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
    let int_sq = pts.weighted_sum(&squares);
    let loo = leave_one_out_sum(sample, &bw)?;
    Ok(int_sq - 2.0 * loo / sample.n() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcvSettings {
    pub optimizer: NelderMeadSettings,
    /// Starting bandwidths, each multiplied by `range_j / width_j`.
    pub starts: Vec<f64>,
    pub lower: f64,
    pub upper: f64,
    /// Raises the lower search bound on each axis to this multiple of the
    /// normal-reference bandwidth. Tied observations otherwise drive the
    /// criterion to minus infinity as `h` shrinks. Zero disables it.
    #[serde(default = "default_reference_fraction")]
    pub reference_fraction: f64,
}

fn default_reference_fraction() -> f64 {
    0.1
}

/// Normal-reference bandwidth per axis in kernel units: the `h` whose kernel
/// variance at the sample mean matches `(1.06 sd n^(-1/5))^2`.
pub fn reference_bandwidths(sample: &Sample) -> Vec<f64> {
    let n = sample.n() as f64;
    (0..sample.d())
        .map(|j| {
            let col = sample.column(j);
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            let iv = sample.support().axis(j);
            let spread = (mean - iv.a()) * (iv.b() - mean);
            let h_abs = 1.06 * var.sqrt() * n.powf(-0.2);
            if spread > 0.0 {
                h_abs * h_abs / spread
            } else {
                0.0
            }
        })
        .collect()
}

impl Default for UcvSettings {
    fn default() -> Self {
        UcvSettings {
            optimizer: NelderMeadSettings {
                max_iter: 200,
                x_tol: 1e-4,
                f_tol: 1e-10,
                initial_step: 0.5,
            },
            starts: vec![0.05, 0.3, 1.0],
            lower: 1e-3,
            upper: 10.0,
            reference_fraction: default_reference_fraction(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UcvSelection {
    pub h: BandwidthVector,
    pub value: f64,
    pub converged: bool,
    pub warnings: Vec<String>,
}

/// Multi-start Nelder-Mead minimisation of the UCV criterion over `log h`.
pub fn ucv_select(sample: &Sample, cubature: &CubatureSpec, settings: &UcvSettings) -> Result<UcvSelection> {
    let d = sample.d();
    if sample.n() < 2 {
        return param_err("cross-validation needs at least two observations");
    }
    if settings.starts.is_empty() {
        return param_err("UCV needs at least one start");
    }
    if !(settings.reference_fraction >= 0.0) {
        return param_err("reference fraction must be nonnegative");
    }
    let lower: Vec<f64> = reference_bandwidths(sample)
        .iter()
        .map(|r| (settings.reference_fraction * r).clamp(settings.lower, settings.upper))
        .collect();
    let bounds = PositiveBounds::new(lower.clone(), vec![settings.upper; d])?;
    let pts = cubature.realize(sample.support().intervals())?;
    let objective = |h: &[f64]| -> f64 {
        let bw = match BandwidthVector::new(h.to_vec()) {
            Ok(b) => Bandwidths::Global(b),
            Err(_) => return f64::INFINITY,
        };
        let values = match raw_eval_cubature(sample, &bw, &pts) {
            Ok(v) => v,
            Err(_) => return f64::INFINITY,
        };
        let squares: Vec<f64> = values.iter().map(|v| v * v).collect();
        let loo = leave_one_out_sum(sample, &bw).unwrap_or(f64::NAN);
        pts.weighted_sum(&squares) - 2.0 * loo / sample.n() as f64
    };
    let scale: Vec<f64> = (0..d)
        .map(|j| {
            let col = sample.column(j);
            let lo = col.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = col.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let r = (hi - lo) / sample.support().axis(j).width();
            if r > 0.0 {
                r
            } else {
                1.0
            }
        })
        .collect();
    let mut best: Option<crate::numerics::optimize::NelderMeadResult> = None;
    let mut warnings = Vec::new();
    for &s in &settings.starts {
        let start: Vec<f64> = scale
            .iter()
            .zip(&lower)
            .map(|(r, lo)| (s * r).clamp(*lo, settings.upper))
            .collect();
        let r = nelder_mead_min(objective, &start, &bounds, &settings.optimizer)?;
        if !r.converged {
            warnings.push(format!("start {s}: no convergence after {} iterations", r.iterations));
        }
        if best.as_ref().is_none_or(|b| r.value < b.value) {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    if !best.value.is_finite() {
        return Err(Error::Integration { point: best.x });
    }
    for (j, at) in bounds.at_bound(&best.x, 1e-6).iter().enumerate() {
        if *at {
            warnings.push(format!("axis {j}: minimiser at the search bound {}", best.x[j]));
        }
    }
    for w in &warnings {
        log::warn!("ucv: {w}");
    }
    Ok(UcvSelection {
        h: BandwidthVector::new(best.x)?,
        value: best.value,
        converged: best.converged,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::Support;
    use approx::assert_relative_eq;

    fn sample_1d(xs: &[f64]) -> Sample {
        Sample::new(xs.to_vec(), Support::from_bounds(&[(0.0, 1.0)]).unwrap()).unwrap()
    }

    #[test]
    fn two_point_sample_matches_single_donor_formula() {
        let (x1, x2) = (0.3, 0.55);
        let s = sample_1d(&[x1, x2]);
        let alpha = 4.0;
        let beta = 0.5;
        let prior = PriorConfig::new(alpha, vec![beta]).unwrap();
        let h = bayes_adaptive_bandwidths(&s, &prior).unwrap();
        // Hand computation for observation 0 with donor 1.
        let kl = x1 * (x1 / x2).ln() + (1.0 - x1) * ((1.0 - x1) / (1.0 - x2)).ln();
        let b = beta + kl;
        let c = (2.0 * std::f64::consts::PI * x1 * (1.0 - x1)).powf(-0.5) * beta.powf(alpha);
        let a_coef = c * b.powf(-alpha - 0.5) * ln_gamma(alpha + 0.5).exp();
        let c_coef = c * b.powf(-alpha + 0.5) * ln_gamma(alpha - 0.5).exp();
        let expected = b * (a_coef / (alpha - 0.5) + c_coef / (alpha - 1.5)) / (a_coef + c_coef);
        assert_relative_eq!(h.row(0)[0], expected, max_relative = 1e-13);
        // Equivalent closed form of the interior mean term.
        let simple = b * (alpha - 1.5 + b) / ((alpha - 1.5) * (alpha - 0.5 + b));
        assert_relative_eq!(h.row(0)[0], simple, max_relative = 1e-13);
    }

    #[test]
    fn boundary_observation_uses_power_branch() {
        let s = sample_1d(&[0.0, 0.4]);
        let alpha = 3.0;
        let beta = 0.2;
        let prior = PriorConfig::new(alpha, vec![beta]).unwrap();
        let h = bayes_adaptive_bandwidths(&s, &prior).unwrap();
        let e = beta - (0.6f64).ln();
        let f = beta.powf(alpha) * ln_gamma(alpha).exp() * e.powf(-alpha);
        let hh = beta.powf(alpha) * ln_gamma(alpha + 1.0).exp() * e.powf(-alpha - 1.0);
        let expected = (f / (alpha - 1.0) + hh / alpha) * e / (f + hh);
        assert_relative_eq!(h.row(0)[0], expected, max_relative = 1e-13);
        let s = sample_1d(&[1.0, 0.4]);
        let h = bayes_adaptive_bandwidths(&s, &prior).unwrap();
        let g = beta - (0.4f64).ln();
        let j = beta.powf(alpha) * ln_gamma(alpha).exp() * g.powf(-alpha);
        let k = beta.powf(alpha) * ln_gamma(alpha + 1.0).exp() * g.powf(-alpha - 1.0);
        assert_relative_eq!(h.row(0)[0], (j / (alpha - 1.0) + k / alpha) * g / (j + k), max_relative = 1e-13);
    }

    #[test]
    fn all_degenerate_donors_fall_back_to_prior_mean() {
        // Interior point whose only donor sits on the boundary.
        let s = sample_1d(&[0.5, 0.0]);
        let prior = PriorConfig::new(5.0, vec![0.3]).unwrap();
        let h = bayes_adaptive_bandwidths(&s, &prior).unwrap();
        assert_relative_eq!(h.row(0)[0], 0.3 / 4.0, max_relative = 1e-15);
        assert!(h.row(1)[0] > 0.0);
    }

    #[test]
    fn alpha_must_exceed_three_halves() {
        assert!(PriorConfig::new(1.5, vec![1.0]).is_err());
        assert!(PriorConfig::new(1.6, vec![0.0]).is_err());
        assert!(PriorConfig::default_for(2, 1, 0.25).is_err());
        assert!(PriorConfig::default_for(3, 1, 0.25).is_ok());
    }

    #[test]
    fn alpha_choice_parses() {
        assert_eq!("auto".parse::<AlphaChoice>().unwrap(), AlphaChoice::Auto);
        assert_eq!("2.5".parse::<AlphaChoice>().unwrap(), AlphaChoice::Fixed(2.5));
        assert!("x".parse::<AlphaChoice>().is_err());
        assert_relative_eq!(AlphaChoice::Auto.resolve(500), 12.011_244_339_814_313, max_relative = 1e-12);
    }

    #[test]
    fn equal_coordinates_give_scale_equal_to_beta() {
        let s = sample_1d(&[0.3, 0.3, 0.8]);
        let prior = PriorConfig::new(3.0, vec![0.7]).unwrap();
        let c = posterior_coefficients(&s, &prior, 0, 1).unwrap();
        assert_eq!(c.axes[0].scale, 0.7);
        let c = posterior_coefficients(&s, &prior, 0, 2).unwrap();
        assert!(c.axes[0].scale > 0.7);
    }

    #[test]
    fn single_donor_posterior_is_two_component_mixture() {
        let s = sample_1d(&[0.3, 0.6]);
        let alpha = 2.5;
        let prior = PriorConfig::new(alpha, vec![0.4]).unwrap();
        let c = posterior_coefficients(&s, &prior, 0, 1).unwrap().axes[0];
        let lm = c.log_mass();
        let (wa, wc) = ((c.log_first - lm).exp(), (c.log_second - lm).exp());
        for h in [0.05, 0.2, 1.3] {
            let expected = wa * log_inverse_gamma(alpha + 0.5, c.scale, h).exp()
                + wc * log_inverse_gamma(alpha - 0.5, c.scale, h).exp();
            assert_relative_eq!(posterior_density(&s, &prior, 0, &[h]).unwrap(), expected, max_relative = 1e-12);
        }
    }

    #[test]
    fn ucv_matches_hand_computation_for_two_points() {
        let s = sample_1d(&[0.35, 0.6]);
        let h = 0.8;
        let spec = CubatureSpec::default_for(1);
        let got = ucv_objective(&s, &BandwidthVector::new(vec![h]).unwrap(), &spec).unwrap();
        let iv = crate::ebkernel::Interval::new(0.0, 1.0).unwrap();
        let k = |x: f64, u: f64| crate::ebkernel::EbKernel::new(x, h, iv).unwrap().density(u);
        let gl = crate::numerics::quadrature::GaussLegendre::new(200);
        let int_sq = gl.integrate(0.0, 1.0, |x| (0.5 * (k(x, 0.35) + k(x, 0.6))).powi(2));
        let expected = int_sq - (k(0.35, 0.6) + k(0.6, 0.35));
        assert_relative_eq!(got, expected, max_relative = 1e-10);
    }
}
