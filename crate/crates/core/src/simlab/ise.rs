//! Integrated squared error of a normalized estimate against a scenario density.

use rayon::prelude::*;

use super::scenarios::{split_axis, ScenarioId};
use crate::estimator::{raw_eval_cubature, Bandwidths, Sample, Support};
use crate::error::{Error, Result};
use crate::numerics::quadrature::{sobol_points, AxisRule, CubaturePoints};
use crate::numerics::special::NeumaierSum;

/// QMC points used for the error in dimension four and above.
pub const ISE_QMC_POINTS: usize = 1 << 17;
const ISE_QMC_SEED: u64 = 0x0001_5E0F_5EED;

fn main_rule(dim: usize) -> AxisRule {
    match dim {
        1 => AxisRule::Graded {
            order: 16,
            panels: 32,
            levels: 30,
        },
        2 => AxisRule::Uniform { order: 32, panels: 4 },
        _ => AxisRule::Uniform { order: 32, panels: 2 },
    }
}

// Pieces outside the density's own box only carry the estimate's tails.
fn tail_rule(dim: usize) -> AxisRule {
    match dim {
        1 => main_rule(1),
        _ => AxisRule::Uniform { order: 16, panels: 1 },
    }
}

/// Nodes for the error integral over `support`, split at the scenario's
/// non-smooth points.
pub fn ise_points(id: ScenarioId, support: &Support) -> Result<CubaturePoints> {
    let d = support.dim();
    if d != id.dim() {
        return Err(Error::Parameter(format!(
            "support has dimension {d}, scenario {id} needs {}",
            id.dim()
        )));
    }
    if d >= 4 {
        let unit = sobol_points(ISE_QMC_POINTS, d, ISE_QMC_SEED)?;
        let points = unit
            .iter()
            .enumerate()
            .map(|(k, u)| {
                let iv = support.axis(k % d);
                iv.a() + iv.width() * u
            })
            .collect();
        return Ok(CubaturePoints::Scattered {
            dim: d,
            points,
            weight: support.volume() / ISE_QMC_POINTS as f64,
        });
    }
    let density_box = id.density_support();
    let axes = (0..d)
        .map(|j| {
            let mut nodes = Vec::new();
            let mut weights = Vec::new();
            for piece in split_axis(support.axis(j), id.breakpoints()) {
                let inside = density_box.as_ref().is_none_or(|b| {
                    let iv = b.axis(j);
                    piece.a() >= iv.a() && piece.b() <= iv.b()
                });
                let rule = if inside { main_rule(d) } else { tail_rule(d) };
                let (n, w) = rule.nodes_weights(piece.a(), piece.b());
                nodes.extend(n);
                weights.extend(w);
            }
            (nodes, weights)
        })
        .collect();
    Ok(CubaturePoints::Tensor { axes })
}

/// Error of an estimate given by its values on `pts`, plus the true
/// density's squared mass outside `support` (nonzero only for unbounded
/// targets).
pub fn ise_from_values(id: ScenarioId, pts: &CubaturePoints, estimate: &[f64]) -> f64 {
    let d = pts.dim();
    let truth: Vec<f64> = (0..pts.len())
        .into_par_iter()
        .map_init(
            || vec![0.0; d],
            |buf, k| {
                pts.point(k, buf);
                id.density(buf)
            },
        )
        .collect();
    let weights = pts.weights();
    let mut err = NeumaierSum::default();
    let mut inside_sq = NeumaierSum::default();
    for ((w, e), t) in weights.iter().zip(estimate).zip(&truth) {
        err.add(w * (e - t) * (e - t));
        inside_sq.add(w * t * t);
    }
    let outside = if id.density_support().is_none() {
        (id.integral_of_square() - inside_sq.total()).max(0.0)
    } else {
        0.0
    };
    err.total() + outside
}

/// Error and normalization constant of one fitted replication.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IseOutcome {
    pub ise: f64,
    pub c_n: f64,
}

/// Error of the normalized estimate built from `sample` and `bandwidths`.
///
/// `C_n` is computed on the same nodes as the error.
pub fn integrated_squared_error(id: ScenarioId, sample: &Sample, bandwidths: &Bandwidths) -> Result<IseOutcome> {
    let pts = ise_points(id, sample.support())?;
    let raw = raw_eval_cubature(sample, bandwidths, &pts)?;
    let c_n = pts.weighted_sum(&raw);
    if !(c_n.is_finite() && c_n > 0.0) {
        return Err(Error::Integration { point: vec![c_n] });
    }
    let normalized: Vec<f64> = raw.iter().map(|v| v / c_n).collect();
    Ok(IseOutcome {
        ise: ise_from_values(id, &pts, &normalized),
        c_n,
    })
}
