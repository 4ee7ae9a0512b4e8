//! The multiple extended-beta kernel estimator: a product of per-axis
//! extended-beta kernels averaged over the sample, with global or
//! per-observation bandwidths.

use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ebkernel::{eb_variance, EbKernel, Interval, KernelShape};
use crate::error::{param_err, Error, Result};
use crate::numerics::quadrature::{CubaturePoints, CubatureSpec};
use crate::numerics::special::NeumaierSum;

/// Product of per-axis compact intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Interval>", into = "Vec<Interval>")]
pub struct Support {
    intervals: Vec<Interval>,
}

impl Support {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return param_err("support needs at least one axis");
        }
        Ok(Support { intervals })
    }

    /// Convenience constructor from `(a, b)` pairs.
    pub fn from_bounds(bounds: &[(f64, f64)]) -> Result<Self> {
        Support::new(
            bounds
                .iter()
                .map(|&(a, b)| Interval::new(a, b))
                .collect::<Result<_>>()?,
        )
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn axis(&self, j: usize) -> Interval {
        self.intervals[j]
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim() && x.iter().zip(&self.intervals).all(|(v, iv)| iv.contains(*v))
    }

    pub fn volume(&self) -> f64 {
        self.intervals.iter().map(Interval::width).product()
    }
}

impl TryFrom<Vec<Interval>> for Support {
    type Error = Error;

    fn try_from(v: Vec<Interval>) -> Result<Self> {
        Support::new(v)
    }
}

impl From<Support> for Vec<Interval> {
    fn from(s: Support) -> Self {
        s.intervals
    }
}

/// `n×d` observations (row-major) lying in a support.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SampleRepr", into = "SampleRepr")]
pub struct Sample {
    data: Vec<f64>,
    n: usize,
    support: Support,
}

#[derive(Serialize, Deserialize)]
struct SampleRepr {
    support: Support,
    rows: Vec<Vec<f64>>,
}

impl TryFrom<SampleRepr> for Sample {
    type Error = Error;

    fn try_from(r: SampleRepr) -> Result<Self> {
        let d = r.support.dim();
        if r.rows.iter().any(|row| row.len() != d) {
            return Err(Error::Data("row length does not match the support dimension".into()));
        }
        Sample::new(r.rows.concat(), r.support)
    }
}

impl From<Sample> for SampleRepr {
    fn from(s: Sample) -> Self {
        SampleRepr {
            rows: (0..s.n).map(|i| s.row(i).to_vec()).collect(),
            support: s.support,
        }
    }
}

impl Sample {
    /// `data` is row-major with `support.dim()` columns.
    pub fn new(data: Vec<f64>, support: Support) -> Result<Self> {
        let d = support.dim();
        if data.is_empty() || !data.len().is_multiple_of(d) {
            return Err(Error::Data(format!(
                "{} values cannot form rows of width {d}",
                data.len()
            )));
        }
        let n = data.len() / d;
        for i in 0..n {
            for j in 0..d {
                let v = data[i * d + j];
                if !v.is_finite() {
                    return Err(Error::Data(format!("non-finite value at row {i}, column {j}")));
                }
                if !support.axis(j).contains(v) {
                    return Err(Error::Domain(format!(
                        "row {i}, column {j}: {v} outside {}",
                        support.axis(j)
                    )));
                }
            }
        }
        Ok(Sample { data, n, support })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.support.dim()
    }

    pub fn support(&self) -> &Support {
        &self.support
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let d = self.d();
        &self.data[i * d..(i + 1) * d]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.data[i * self.d() + j]).collect()
    }

    /// Same observations on a different support.
    pub fn with_support(&self, support: Support) -> Result<Self> {
        if support.dim() != self.d() {
            return param_err("support dimension does not match the sample");
        }
        Sample::new(self.data.clone(), support)
    }
}

/// One bandwidth per axis, shared by all observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct BandwidthVector(Vec<f64>);

impl BandwidthVector {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        if h.is_empty() || h.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return param_err(format!("bandwidths must be positive and finite, got {h:?}"));
        }
        Ok(BandwidthVector(h))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for BandwidthVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        BandwidthVector::new(v)
    }
}

impl From<BandwidthVector> for Vec<f64> {
    fn from(b: BandwidthVector) -> Self {
        b.0
    }
}

/// Per-observation bandwidths, `n×d` row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct AdaptiveBandwidths {
    h: Vec<f64>,
    d: usize,
}

impl AdaptiveBandwidths {
    pub fn new(h: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 || h.is_empty() || !h.len().is_multiple_of(d) {
            return param_err("adaptive bandwidths must form complete rows");
        }
        if let Some(bad) = h.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return param_err(format!("bandwidths must be positive and finite, got {bad}"));
        }
        Ok(AdaptiveBandwidths { h, d })
    }

    pub fn n(&self) -> usize {
        self.h.len() / self.d
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.h[i * self.d..(i + 1) * self.d]
    }

    pub fn values(&self) -> &[f64] {
        &self.h
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.h[i * self.d + j]).collect()
    }
}

impl TryFrom<Vec<Vec<f64>>> for AdaptiveBandwidths {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != d) {
            return param_err("ragged bandwidth rows");
        }
        AdaptiveBandwidths::new(rows.concat(), d)
    }
}

impl From<AdaptiveBandwidths> for Vec<Vec<f64>> {
    fn from(a: AdaptiveBandwidths) -> Self {
        (0..a.n()).map(|i| a.row(i).to_vec()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidths {
    Global(BandwidthVector),
    Adaptive(AdaptiveBandwidths),
}

impl Bandwidths {
    /// Bandwidth row attached to observation `i`.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        match self {
            Bandwidths::Global(h) => h.as_slice(),
            Bandwidths::Adaptive(a) => a.row(i),
        }
    }

    pub fn is_adaptive(&self) -> bool {
        matches!(self, Bandwidths::Adaptive(_))
    }

    fn check(&self, sample: &Sample) -> Result<()> {
        match self {
            Bandwidths::Global(h) if h.as_slice().len() != sample.d() => {
                param_err("bandwidth vector length does not match the sample dimension")
            }
            Bandwidths::Adaptive(a) if a.n() != sample.n() || a.d() != sample.d() => {
                param_err("adaptive bandwidth shape does not match the sample")
            }
            _ => Ok(()),
        }
    }
}

impl From<BandwidthVector> for Bandwidths {
    fn from(h: BandwidthVector) -> Self {
        Bandwidths::Global(h)
    }
}

impl From<AdaptiveBandwidths> for Bandwidths {
    fn from(h: AdaptiveBandwidths) -> Self {
        Bandwidths::Adaptive(h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    /// Divided by `C_n = ∫ f̂` over the sample support.
    Normalized,
}

/// A fitted estimator. Immutable; `C_n` is computed on first use.
#[derive(Debug)]
pub struct DensityEstimate {
    sample: Sample,
    bandwidths: Bandwidths,
    mode: Normalization,
    cubature: CubatureSpec,
    c_n: OnceLock<Result<f64>>,
}

impl Clone for DensityEstimate {
    fn clone(&self) -> Self {
        let c_n = OnceLock::new();
        if let Some(v) = self.c_n.get() {
            let _ = c_n.set(v.clone());
        }
        DensityEstimate {
            sample: self.sample.clone(),
            bandwidths: self.bandwidths.clone(),
            mode: self.mode,
            cubature: self.cubature,
            c_n,
        }
    }
}

impl DensityEstimate {
    pub fn new(sample: Sample, bandwidths: Bandwidths, mode: Normalization) -> Result<Self> {
        let cubature = CubatureSpec::default_for(sample.d());
        Self::with_cubature(sample, bandwidths, mode, cubature)
    }

    pub fn with_cubature(
        sample: Sample,
        bandwidths: Bandwidths,
        mode: Normalization,
        cubature: CubatureSpec,
    ) -> Result<Self> {
        bandwidths.check(&sample)?;
        Ok(DensityEstimate {
            sample,
            bandwidths,
            mode,
            cubature,
            c_n: OnceLock::new(),
        })
    }

    /// Seeds the cache with a previously computed `C_n`.
    pub fn with_known_normalization(self, c_n: f64) -> Result<Self> {
        if !(c_n.is_finite() && c_n > 0.0) {
            return param_err(format!("normalization constant must be positive, got {c_n}"));
        }
        let cell = OnceLock::new();
        let _ = cell.set(Ok(c_n));
        Ok(DensityEstimate { c_n: cell, ..self })
    }

    pub fn sample(&self) -> &Sample {
        &self.sample
    }

    pub fn bandwidths(&self) -> &Bandwidths {
        &self.bandwidths
    }

    pub fn mode(&self) -> Normalization {
        self.mode
    }

    pub fn cubature(&self) -> &CubatureSpec {
        &self.cubature
    }

    /// `C_n`, computed once and cached.
    pub fn normalization_constant(&self) -> Result<f64> {
        self.c_n
            .get_or_init(|| {
                let c = normalization_constant(&self.sample, &self.bandwidths, &self.cubature)?;
                if !(0.5..2.0).contains(&c) {
                    log::warn!("normalization constant {c} is far from 1");
                }
                Ok(c)
            })
            .clone()
    }

    fn scale(&self) -> Result<f64> {
        match self.mode {
            Normalization::Raw => Ok(1.0),
            Normalization::Normalized => Ok(1.0 / self.normalization_constant()?),
        }
    }

    /// Estimate at `x`; a point outside the support is an error.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_point(&self.sample, x)?;
        Ok(raw_eval(&self.sample, &self.bandwidths, x) * self.scale()?)
    }

    /// Estimate on the tensor grid `axes[0] × … × axes[d-1]`, last axis fastest.
    pub fn eval_grid(&self, axes: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut v = raw_eval_grid(&self.sample, &self.bandwidths, axes)?;
        let s = self.scale()?;
        v.iter_mut().for_each(|x| *x *= s);
        Ok(v)
    }

    /// Estimate at every point of a realised cubature rule.
    pub fn eval_cubature(&self, pts: &CubaturePoints) -> Result<Vec<f64>> {
        let mut v = raw_eval_cubature(&self.sample, &self.bandwidths, pts)?;
        let s = self.scale()?;
        v.iter_mut().for_each(|x| *x *= s);
        Ok(v)
    }
}

fn check_point(sample: &Sample, x: &[f64]) -> Result<()> {
    if x.len() != sample.d() {
        return param_err(format!("point has {} coordinates, expected {}", x.len(), sample.d()));
    }
    if !sample.support().contains(x) {
        return Err(Error::Domain(format!("{x:?} outside the support")));
    }
    Ok(())
}

/// Unnormalized estimate at `x` (assumed inside the support).
pub(crate) fn raw_eval(sample: &Sample, bw: &Bandwidths, x: &[f64]) -> f64 {
    let d = sample.d();
    let support = sample.support();
    let mut s = NeumaierSum::default();
    match bw {
        Bandwidths::Global(h) => {
            let shapes: Vec<KernelShape> = (0..d)
                .map(|j| {
                    let iv = support.axis(j);
                    KernelShape::new(x[j], h.as_slice()[j], iv.a(), iv.b())
                })
                .collect();
            for i in 0..sample.n() {
                let row = sample.row(i);
                let lv: f64 = (0..d).map(|j| shapes[j].log_density(row[j])).sum();
                s.add(lv.exp());
            }
        }
        Bandwidths::Adaptive(a) => {
            for i in 0..sample.n() {
                let row = sample.row(i);
                let hr = a.row(i);
                let lv: f64 = (0..d)
                    .map(|j| {
                        let iv = support.axis(j);
                        KernelShape::new(x[j], hr[j], iv.a(), iv.b()).log_density(row[j])
                    })
                    .sum();
                s.add(lv.exp());
            }
        }
    }
    s.total() / sample.n() as f64
}

/// Kernel values for one axis: `out[g * n + i] = EB_{node_g, h_ij}(X_ij)`.
fn axis_kernel_matrix(sample: &Sample, bw: &Bandwidths, j: usize, nodes: &[f64]) -> Vec<f64> {
    let n = sample.n();
    let d = sample.d();
    let iv = sample.support().axis(j);
    let data = sample.data();
    let rows: Vec<Vec<f64>> = nodes
        .par_iter()
        .map(|&node| match bw {
            Bandwidths::Global(h) => {
                let shape = KernelShape::new(node, h.as_slice()[j], iv.a(), iv.b());
                (0..n).map(|i| shape.log_density(data[i * d + j]).exp()).collect()
            }
            Bandwidths::Adaptive(a) => (0..n)
                .map(|i| {
                    KernelShape::new(node, a.row(i)[j], iv.a(), iv.b())
                        .log_density(data[i * d + j])
                        .exp()
                })
                .collect(),
        })
        .collect();
    rows.concat()
}

pub(crate) fn raw_eval_grid(sample: &Sample, bw: &Bandwidths, axes: &[Vec<f64>]) -> Result<Vec<f64>> {
    let d = sample.d();
    if axes.len() != d {
        return param_err(format!("grid has {} axes, expected {d}", axes.len()));
    }
    for (j, nodes) in axes.iter().enumerate() {
        let iv = sample.support().axis(j);
        if let Some(bad) = nodes.iter().find(|v| !iv.contains(**v)) {
            return Err(Error::Domain(format!("grid node {bad} outside {iv} on axis {j}")));
        }
    }
    let n = sample.n();
    let mats: Vec<Vec<f64>> = (0..d).map(|j| axis_kernel_matrix(sample, bw, j, &axes[j])).collect();
    let sizes: Vec<usize> = axes.iter().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let inv_n = 1.0 / n as f64;
    let out = (0..total)
        .into_par_iter()
        .map_init(
            || (vec![0usize; d], vec![0.0; n]),
            |(idx, prod), k| {
                let mut rem = k;
                for j in (0..d).rev() {
                    idx[j] = rem % sizes[j];
                    rem /= sizes[j];
                }
                prod.copy_from_slice(&mats[0][idx[0] * n..(idx[0] + 1) * n]);
                for j in 1..d {
                    let m = &mats[j][idx[j] * n..(idx[j] + 1) * n];
                    prod.iter_mut().zip(m).for_each(|(p, v)| *p *= v);
                }
                let mut s = NeumaierSum::default();
                prod.iter().for_each(|v| s.add(*v));
                s.total() * inv_n
            },
        )
        .collect();
    Ok(out)
}

pub(crate) fn raw_eval_cubature(sample: &Sample, bw: &Bandwidths, pts: &CubaturePoints) -> Result<Vec<f64>> {
    match pts {
        CubaturePoints::Tensor { axes } => {
            let nodes: Vec<Vec<f64>> = axes.iter().map(|(n, _)| n.clone()).collect();
            raw_eval_grid(sample, bw, &nodes)
        }
        CubaturePoints::Scattered { dim, points, .. } => {
            if *dim != sample.d() {
                return param_err("cubature dimension does not match the sample");
            }
            for p in points.chunks(*dim) {
                check_point(sample, p)?;
            }
            Ok(points.par_chunks(*dim).map(|p| raw_eval(sample, bw, p)).collect())
        }
    }
}

/// `C_n = ∫ f̂` over the sample support.
pub fn normalization_constant(sample: &Sample, bandwidths: &Bandwidths, cubature: &CubatureSpec) -> Result<f64> {
    bandwidths.check(sample)?;
    let pts = cubature.realize(sample.support().intervals())?;
    let values = raw_eval_cubature(sample, bandwidths, &pts)?;
    if let Some(k) = values.iter().position(|v| v.is_nan()) {
        let mut p = vec![0.0; pts.dim()];
        pts.point(k, &mut p);
        return Err(Error::Integration { point: p });
    }
    Ok(pts.weighted_sum(&values))
}

/// `(1/(n-1)) Σ_{j≠i} Π_ℓ EB_{X_iℓ, h_iℓ}(X_jℓ)`.
pub fn leave_one_out_eval(sample: &Sample, bandwidths: &Bandwidths, i: usize) -> Result<f64> {
    bandwidths.check(sample)?;
    let n = sample.n();
    if n < 2 {
        return param_err("leave-one-out needs at least two observations");
    }
    if i >= n {
        return param_err(format!("observation index {i} out of range for n = {n}"));
    }
    Ok(loo_unchecked(sample, bandwidths.row(i), i))
}

pub(crate) fn loo_unchecked(sample: &Sample, h: &[f64], i: usize) -> f64 {
    let d = sample.d();
    let target = sample.row(i);
    let shapes: Vec<KernelShape> = (0..d)
        .map(|l| {
            let iv = sample.support().axis(l);
            KernelShape::new(target[l], h[l], iv.a(), iv.b())
        })
        .collect();
    let mut s = NeumaierSum::default();
    for j in (0..sample.n()).filter(|&j| j != i) {
        let row = sample.row(j);
        let lv: f64 = (0..d).map(|l| shapes[l].log_density(row[l])).sum();
        s.add(lv.exp());
    }
    s.total() / (sample.n() - 1) as f64
}

/// `Σ_i` of the leave-one-out values, summed in index order.
pub fn leave_one_out_sum(sample: &Sample, bandwidths: &Bandwidths) -> Result<f64> {
    bandwidths.check(sample)?;
    if sample.n() < 2 {
        return param_err("leave-one-out needs at least two observations");
    }
    let v: Vec<f64> = (0..sample.n())
        .into_par_iter()
        .map(|i| loo_unchecked(sample, bandwidths.row(i), i))
        .collect();
    Ok(v.into_iter().collect::<NeumaierSum>().total())
}

/// Value, gradient and diagonal second derivatives of a density at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointDerivatives {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub second: Vec<f64>,
}

/// Leading-order bias and variance of the fixed-bandwidth estimator at `x`.
///
/// The bias combines the kernel mean shift with the kernel variance; the
/// variance is `f(x)/n` times the squared L2 norm of the product kernel.
pub fn bias_variance_leading_terms(
    f: &PointDerivatives,
    x: &[f64],
    h: &BandwidthVector,
    support: &Support,
    n: usize,
) -> Result<(f64, f64)> {
    let d = support.dim();
    if x.len() != d || h.as_slice().len() != d || f.gradient.len() != d || f.second.len() != d {
        return param_err("dimension mismatch in bias/variance inputs");
    }
    if n == 0 {
        return param_err("sample size must be positive");
    }
    let mut bias = 0.0;
    let mut l2 = 1.0;
    for j in 0..d {
        let k = EbKernel::new(x[j], h.as_slice()[j], support.axis(j))?;
        let shift = k.mean_shift();
        bias += shift * f.gradient[j]
            + 0.5 * (shift * shift + eb_variance(x[j], h.as_slice()[j], support.axis(j))) * f.second[j];
        l2 *= k.l2_factor();
    }
    Ok((bias, f.value * l2 / n as f64))
}
