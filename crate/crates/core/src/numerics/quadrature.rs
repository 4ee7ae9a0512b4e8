//! Gauss-Legendre rules (plain, composite and endpoint-graded), tensor
//! products over boxes, and scrambled Sobol points for higher dimensions.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::rng::stream;
use super::special::NeumaierSum;
use crate::ebkernel::Interval;
use crate::error::{param_err, Error, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Computes the `order`-point rule by Newton iteration on `P_order`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Legendre order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            // Tricomi's initial guess, then Newton on the three-term recurrence.
            let theta = std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5);
            let mut x = (1.0 - (nf - 1.0) / (8.0 * nf * nf * nf)) * theta.cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            let (_, d) = legendre_with_derivative(n, 0.0);
            nodes[n / 2] = 0.0;
            weights[n / 2] = 2.0 / (d * d);
        }
        GaussLegendre { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = NeumaierSum::default();
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s.add(w * f(mid + half * x));
        }
        half * s.total()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// One-dimensional rule applied along every axis of a tensor cubature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisRule {
    /// `panels` equal sub-intervals, each with an `order`-point rule.
    Uniform { order: usize, panels: usize },
    /// Like `Uniform`, but the two end panels are split geometrically
    /// (`levels` halvings) so endpoint singularities and boundary spikes
    /// are resolved.
    Graded {
        order: usize,
        panels: usize,
        levels: usize,
    },
}

impl AxisRule {
    fn breakpoints_unit(&self) -> Vec<f64> {
        match *self {
            AxisRule::Uniform { panels, .. } => {
                let p = panels.max(1);
                (0..=p).map(|k| k as f64 / p as f64).collect()
            }
            AxisRule::Graded { panels, levels, .. } => {
                let p = panels.max(2);
                let delta = 1.0 / p as f64;
                let mut bp = vec![0.0];
                for k in (1..=levels).rev() {
                    bp.push(delta * 0.5f64.powi(k as i32));
                }
                for k in 1..p {
                    bp.push(k as f64 * delta);
                }
                for k in 1..=levels {
                    bp.push(1.0 - delta * 0.5f64.powi(k as i32));
                }
                bp.push(1.0);
                bp
            }
        }
    }

    fn order(&self) -> usize {
        match *self {
            AxisRule::Uniform { order, .. } | AxisRule::Graded { order, .. } => order,
        }
    }

    /// Nodes and weights of this rule mapped onto `[a, b]`.
    pub fn nodes_weights(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let gl = GaussLegendre::new(self.order());
        let bp = self.breakpoints_unit();
        let width = b - a;
        let mut nodes = Vec::with_capacity((bp.len() - 1) * gl.nodes.len());
        let mut weights = Vec::with_capacity(nodes.capacity());
        for win in bp.windows(2) {
            let (lo, hi) = (a + width * win[0], a + width * win[1]);
            let half = 0.5 * (hi - lo);
            let mid = 0.5 * (hi + lo);
            for (x, w) in gl.nodes.iter().zip(&gl.weights) {
                nodes.push(mid + half * x);
                weights.push(half * w);
            }
        }
        (nodes, weights)
    }

    pub fn len(&self) -> usize {
        (self.breakpoints_unit().len() - 1) * self.order()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How an integral over a box is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum CubatureSpec {
    /// Tensor product of a 1-d Gauss-Legendre rule (dimension ≤ 3).
    GaussLegendreTensor { rule: AxisRule },
    /// Randomly shifted Sobol points (intended for dimension ≥ 4).
    QuasiMonteCarlo { points: usize, seed: u64 },
}

/// Highest dimension accepted by the tensor rule.
pub const MAX_TENSOR_DIM: usize = 3;

impl CubatureSpec {
    /// Plain tensor Gauss-Legendre rule with `nodes_per_dim` nodes.
    pub fn gauss_legendre(nodes_per_dim: usize) -> Self {
        CubatureSpec::GaussLegendreTensor {
            rule: AxisRule::Uniform {
                order: nodes_per_dim,
                panels: 1,
            },
        }
    }

    /// Default discretisation for estimator integrals in dimension `dim`.
    pub fn default_for(dim: usize) -> Self {
        match dim {
            1 => CubatureSpec::GaussLegendreTensor {
                rule: AxisRule::Graded {
                    order: 16,
                    panels: 32,
                    levels: 30,
                },
            },
            2 => CubatureSpec::GaussLegendreTensor {
                rule: AxisRule::Uniform {
                    order: 32,
                    panels: 4,
                },
            },
            3 => CubatureSpec::GaussLegendreTensor {
                rule: AxisRule::Uniform {
                    order: 32,
                    panels: 2,
                },
            },
            _ => CubatureSpec::QuasiMonteCarlo {
                points: 1 << 16,
                seed: 0x5EED_CAFE,
            },
        }
    }

    /// Realises the node set for a box.
    pub fn realize(&self, bounds: &[Interval]) -> Result<CubaturePoints> {
        let dim = bounds.len();
        if dim == 0 {
            return param_err("cubature over a zero-dimensional box");
        }
        match *self {
            CubatureSpec::GaussLegendreTensor { rule } => {
                if dim > MAX_TENSOR_DIM {
                    return param_err(format!(
                        "tensor Gauss-Legendre is limited to dimension {MAX_TENSOR_DIM}, got {dim}"
                    ));
                }
                if rule.order() == 0 {
                    return param_err("quadrature order must be positive");
                }
                let axes = bounds.iter().map(|iv| rule.nodes_weights(iv.a(), iv.b())).collect();
                Ok(CubaturePoints::Tensor { axes })
            }
            CubatureSpec::QuasiMonteCarlo { points, seed } => {
                if points == 0 {
                    return param_err("QMC needs at least one point");
                }
                let unit = sobol_points(points, dim, seed)?;
                let mut volume = 1.0;
                for iv in bounds {
                    volume *= iv.width();
                }
                let mut pts = unit;
                for (k, v) in pts.iter_mut().enumerate() {
                    let iv = &bounds[k % dim];
                    *v = iv.a() + iv.width() * *v;
                }
                Ok(CubaturePoints::Scattered {
                    dim,
                    points: pts,
                    weight: volume / points as f64,
                })
            }
        }
    }
}

/// A realised node set.
#[derive(Debug, Clone)]
pub enum CubaturePoints {
    /// Per-axis `(nodes, weights)`; the full grid is their tensor product.
    Tensor { axes: Vec<(Vec<f64>, Vec<f64>)> },
    /// Row-major point list with a common weight.
    Scattered {
        dim: usize,
        points: Vec<f64>,
        weight: f64,
    },
}

impl CubaturePoints {
    pub fn len(&self) -> usize {
        match self {
            CubaturePoints::Tensor { axes } => axes.iter().map(|(n, _)| n.len()).product(),
            CubaturePoints::Scattered { dim, points, .. } => points.len() / dim,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        match self {
            CubaturePoints::Tensor { axes } => axes.len(),
            CubaturePoints::Scattered { dim, .. } => *dim,
        }
    }

    /// Point `k` (tensor order: last axis fastest) and its weight.
    pub fn point(&self, k: usize, out: &mut [f64]) -> f64 {
        match self {
            CubaturePoints::Tensor { axes } => {
                let mut rem = k;
                let mut w = 1.0;
                for (j, (nodes, weights)) in axes.iter().enumerate().rev() {
                    let idx = rem % nodes.len();
                    rem /= nodes.len();
                    out[j] = nodes[idx];
                    w *= weights[idx];
                }
                w
            }
            CubaturePoints::Scattered { dim, points, weight } => {
                out.copy_from_slice(&points[k * dim..(k + 1) * dim]);
                *weight
            }
        }
    }

    /// Weights in point order.
    pub fn weights(&self) -> Vec<f64> {
        let mut buf = vec![0.0; self.dim()];
        (0..self.len()).map(|k| self.point(k, &mut buf)).collect()
    }

    /// Weighted sum of precomputed values (in point order), in fixed order.
    pub fn weighted_sum(&self, values: &[f64]) -> f64 {
        let mut buf = vec![0.0; self.dim()];
        let mut s = NeumaierSum::default();
        for (k, v) in values.iter().enumerate() {
            s.add(self.point(k, &mut buf) * v);
        }
        s.total()
    }
}

/// Integrates `f` over the box `bounds`.
///
/// Values are computed in parallel and reduced in point order, so the result
/// does not depend on the worker count. A NaN value aborts with the point
/// that produced it.
pub fn integrate_box<F>(f: F, bounds: &[Interval], spec: &CubatureSpec) -> Result<f64>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let pts = spec.realize(bounds)?;
    let dim = pts.dim();
    let values: Vec<(f64, f64)> = (0..pts.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; dim],
            |buf, k| {
                let w = pts.point(k, buf);
                (w, f(buf))
            },
        )
        .collect();
    let mut s = NeumaierSum::default();
    for (k, (w, v)) in values.into_iter().enumerate() {
        if v.is_nan() {
            let mut buf = vec![0.0; dim];
            pts.point(k, &mut buf);
            return Err(Error::Integration { point: buf });
        }
        s.add(w * v);
    }
    Ok(s.total())
}

// Joe-Kuo primitive polynomials and initial direction numbers, dimensions 2..=8.
const SOBOL_PARAMS: [(u32, u32, &[u32]); 7] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
    (5, 2, &[1, 1, 5, 5, 17]),
];

/// Highest dimension supported by the Sobol generator.
pub const MAX_SOBOL_DIM: usize = SOBOL_PARAMS.len() + 1;

fn direction_numbers(dim_index: usize) -> [u32; 32] {
    let mut v = [0u32; 32];
    if dim_index == 0 {
        for (k, vk) in v.iter_mut().enumerate() {
            *vk = 1u32 << (31 - k);
        }
        return v;
    }
    let (s, a, m) = SOBOL_PARAMS[dim_index - 1];
    let s = s as usize;
    for k in 0..32 {
        if k < s {
            v[k] = m[k] << (31 - k);
        } else {
            let mut x = v[k - s] ^ (v[k - s] >> s);
            for r in 1..s {
                if (a >> (s - 1 - r)) & 1 == 1 {
                    x ^= v[k - r];
                }
            }
            v[k] = x;
        }
    }
    v
}

/// `count` Sobol points in `[0,1)^dim` (row-major), with a Cranley-Patterson
/// shift drawn from `seed`, kept strictly inside the open unit cube.
pub fn sobol_points(count: usize, dim: usize, seed: u64) -> Result<Vec<f64>> {
    if dim == 0 || dim > MAX_SOBOL_DIM {
        return param_err(format!("Sobol points support 1..={MAX_SOBOL_DIM} dimensions, got {dim}"));
    }
    let dirs: Vec<[u32; 32]> = (0..dim).map(direction_numbers).collect();
    let mut rng = stream(seed, 0);
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let scale = 1.0 / 4_294_967_296.0;
    let eps = 1e-15;
    let mut out = Vec::with_capacity(count * dim);
    let mut x = vec![0u32; dim];
    for i in 0..count {
        if i > 0 {
            let c = (i - 1).trailing_ones() as usize;
            for j in 0..dim {
                x[j] ^= dirs[j][c];
            }
        }
        for j in 0..dim {
            let mut u = x[j] as f64 * scale + shift[j];
            if u >= 1.0 {
                u -= 1.0;
            }
            out.push(u.clamp(eps, 1.0 - eps));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit(d: usize) -> Vec<Interval> {
        vec![Interval::new(0.0, 1.0).unwrap(); d]
    }

    #[test]
    fn gl32_is_exact_for_monomials_up_to_degree_63() {
        let gl = GaussLegendre::new(32);
        for k in 0..=63 {
            let got = gl.integrate(0.0, 1.0, |x| x.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-13, "k={k}: {got}");
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for order in [1, 2, 7, 64, 257] {
            let gl = GaussLegendre::new(order);
            let s: f64 = gl.weights.iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-12);
            assert!(gl.nodes.iter().all(|x| x.abs() < 1.0));
        }
    }

    #[test]
    fn constant_integrates_exactly() {
        let v = integrate_box(|_| 1.0, &unit(2), &CubatureSpec::gauss_legendre(8)).unwrap();
        assert_relative_eq!(v, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn graded_rule_handles_endpoint_singularity() {
        let rule = AxisRule::Graded {
            order: 16,
            panels: 8,
            levels: 40,
        };
        let (x, w) = rule.nodes_weights(0.0, 1.0);
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powf(0.01)).sum();
        assert_relative_eq!(got, 1.0 / 1.01, epsilon = 1e-11);
        let got: f64 = x.iter().zip(&w).map(|(x, w)| w / x.sqrt()).sum();
        assert_relative_eq!(got, 2.0, epsilon = 1e-5);
    }

    #[test]
    fn tensor_rule_rejects_high_dimension() {
        assert!(CubatureSpec::gauss_legendre(4).realize(&unit(4)).is_err());
    }

    #[test]
    fn nan_integrand_names_the_point() {
        let err = integrate_box(|x| if x[0] > 0.5 { f64::NAN } else { 1.0 }, &unit(1), &CubatureSpec::gauss_legendre(4))
            .unwrap_err();
        match err {
            Error::Integration { point } => assert!(point[0] > 0.5),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sobol_projections_are_stratified() {
        // Each coordinate of the first 2^m unshifted points hits every dyadic cell once.
        let m = 8;
        for d in 0..MAX_SOBOL_DIM {
            let dirs = direction_numbers(d);
            let mut x = 0u32;
            let mut seen = vec![false; 1 << m];
            for i in 0..(1usize << m) {
                if i > 0 {
                    x ^= dirs[(i - 1).trailing_ones() as usize];
                }
                let cell = (x >> (32 - m)) as usize;
                assert!(!seen[cell], "dim {d} cell {cell} hit twice");
                seen[cell] = true;
            }
        }
    }

    #[test]
    fn qmc_integrates_smooth_5d_function() {
        let spec = CubatureSpec::QuasiMonteCarlo {
            points: 1 << 14,
            seed: 7,
        };
        let f = |x: &[f64]| x.iter().map(|v| 1.5 * v.sqrt()).product::<f64>();
        let v = integrate_box(f, &unit(5), &spec).unwrap();
        assert!((v - 1.0).abs() < 2e-3, "{v}");
    }
}
