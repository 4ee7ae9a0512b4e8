//! Shared numerical services: special functions, cubature over boxes,
//! bounded Nelder-Mead in log space, seeded random streams and the
//! distribution samplers used by the simulation scenarios.

pub mod optimize;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod special;

pub use optimize::{nelder_mead_min, NelderMeadResult, NelderMeadSettings, PositiveBounds};
pub use quadrature::{integrate_box, AxisRule, CubaturePoints, CubatureSpec, GaussLegendre};
pub use rng::{stream, RngSeed, SimRng};
pub use sampling::MvNormal;
pub use special::{ln_beta, ln_gamma, log_sum_exp, NeumaierSum};
