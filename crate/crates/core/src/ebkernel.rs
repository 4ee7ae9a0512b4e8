//! The univariate extended-beta kernel on a compact interval.
//!
//! With `t = (u - a)/(b - a)`, `p = (x - a)/((b - a)h)` and
//! `q = (b - x)/((b - a)h)`, the kernel is the Beta(1 + p, 1 + q) density of
//! `t` rescaled onto `[a, b]`. Its mode is `x` and `h` controls the spread.

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Error, Result};
use crate::numerics::quadrature::AxisRule;
use crate::numerics::special::{ln_beta, NeumaierSum};

/// A finite interval `[a, b]` with `a < b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "(f64, f64)", into = "(f64, f64)")]
pub struct Interval {
    a: f64,
    b: f64,
}

impl Interval {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return param_err(format!("interval [{a}, {b}] must be finite with a < b"));
        }
        Ok(Interval { a, b })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    #[inline]
    pub fn width(&self) -> f64 {
        self.b - self.a
    }

    #[inline]
    pub fn contains(&self, u: f64) -> bool {
        u >= self.a && u <= self.b
    }
}

impl TryFrom<(f64, f64)> for Interval {
    type Error = Error;

    fn try_from((a, b): (f64, f64)) -> Result<Self> {
        Interval::new(a, b)
    }
}

impl From<Interval> for (f64, f64) {
    fn from(iv: Interval) -> Self {
        (iv.a, iv.b)
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

/// Kernel with target `x`, dispersion `h` and support `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EbKernel {
    x: f64,
    h: f64,
    support: Interval,
    shape: KernelShape,
}

impl EbKernel {
    pub fn new(x: f64, h: f64, support: Interval) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return param_err(format!("bandwidth must be positive and finite, got {h}"));
        }
        if !support.contains(x) {
            return param_err(format!("target {x} outside {support}"));
        }
        Ok(EbKernel {
            x,
            h,
            support,
            shape: KernelShape::new(x, h, support.a, support.b),
        })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn support(&self) -> Interval {
        self.support
    }

    /// Beta shape parameters `(1 + p, 1 + q)`, both greater than or equal to 1.
    pub fn shape_parameters(&self) -> (f64, f64) {
        (1.0 + self.shape.p, 1.0 + self.shape.q)
    }

    /// Log density at `u`; `-inf` outside the support and at an endpoint
    /// whose exponent is positive.
    pub fn log_density(&self, u: f64) -> f64 {
        self.shape.log_density(u)
    }

    pub fn density(&self, u: f64) -> f64 {
        self.log_density(u).exp()
    }

    /// `E[Z] - x = (a + b - 2x)h / (1 + 2h)`.
    pub fn mean_shift(&self) -> f64 {
        (self.support.a + self.support.b - 2.0 * self.x) * self.h / (1.0 + 2.0 * self.h)
    }

    pub fn variance(&self) -> f64 {
        eb_variance(self.x, self.h, self.support)
    }

    /// `∫ EB(u)^2 du`.
    pub fn l2_factor(&self) -> f64 {
        let KernelShape { p, q, .. } = self.shape;
        (ln_beta(1.0 + 2.0 * p, 1.0 + 2.0 * q) - 2.0 * ln_beta(1.0 + p, 1.0 + q)).exp()
            / self.support.width()
    }
}

/// `Var Z` for target `x` and dispersion `h`, without validation.
pub(crate) fn eb_variance(x: f64, h: f64, support: Interval) -> f64 {
    let (a, b, w) = (support.a, support.b, support.width());
    (x - a + w * h) * (b - x + w * h) * h / ((1.0 + 2.0 * h).powi(2) * (1.0 + 3.0 * h))
}

/// Precomputed exponents and log normalizer for repeated evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct KernelShape {
    p: f64,
    q: f64,
    a: f64,
    b: f64,
    log_norm: f64,
}

impl KernelShape {
    #[inline]
    pub(crate) fn new(x: f64, h: f64, a: f64, b: f64) -> Self {
        let w = b - a;
        let p = (x - a) / (w * h);
        let q = (b - x) / (w * h);
        let log_norm = ln_beta(1.0 + p, 1.0 + q) + (1.0 + p + q) * w.ln();
        KernelShape { p, q, a, b, log_norm }
    }

    #[inline]
    pub(crate) fn log_density(&self, u: f64) -> f64 {
        if !(u >= self.a && u <= self.b) {
            return f64::NEG_INFINITY;
        }
        xlogy(self.p, u - self.a) + xlogy(self.q, self.b - u) - self.log_norm
    }
}

// 0·ln 0 = 0.
#[inline]
fn xlogy(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `∫_a^b EB(u) du` by a composite Gauss-Legendre rule of the given order,
/// graded toward both endpoints.
pub fn normalization_check(kernel: &EbKernel, quad_order: usize) -> f64 {
    let rule = AxisRule::Graded {
        order: quad_order.max(1),
        panels: 32,
        levels: 40,
    };
    let (nodes, weights) = rule.nodes_weights(kernel.support.a, kernel.support.b);
    let mut s = NeumaierSum::default();
    for (u, w) in nodes.iter().zip(&weights) {
        s.add(w * kernel.density(*u));
    }
    s.total()
}
