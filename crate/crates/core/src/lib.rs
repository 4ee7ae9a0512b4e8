//! Multivariate extended-beta kernel density estimation on compact boxes,
//! with Bayesian adaptive and cross-validated bandwidths.

// `!(x > 0.0)` guards are deliberate: they reject NaN too. Index loops mirror
// the per-axis formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bandwidth;
pub mod ebkernel;
pub mod error;
pub mod estimator;
pub mod numerics;
pub mod simlab;
pub mod support;

pub use bandwidth::{bayes_adaptive_bandwidths, ucv_select, AlphaChoice, PriorConfig, UcvSelection, UcvSettings};
pub use ebkernel::{EbKernel, Interval};
pub use error::{Error, Result};
pub use estimator::{AdaptiveBandwidths, BandwidthVector, Bandwidths, DensityEstimate, Normalization, Sample, Support};
pub use numerics::quadrature::CubatureSpec;
pub use support::{SupportMode, SupportPolicy};
