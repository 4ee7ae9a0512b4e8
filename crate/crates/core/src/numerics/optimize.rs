//! Derivative-free minimisation over positive boxes.
//!
//! The simplex lives in log coordinates; each vertex is clamped to the box
//! before the objective sees it.

use serde::{Deserialize, Serialize};

use crate::error::{param_err, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NelderMeadSettings {
    pub max_iter: usize,
    /// Stop when the simplex diameter (in log units) falls below this.
    pub x_tol: f64,
    /// Stop when the spread of vertex values falls below this.
    pub f_tol: f64,
    /// Initial simplex edge in log units.
    pub initial_step: f64,
}

impl Default for NelderMeadSettings {
    fn default() -> Self {
        NelderMeadSettings {
            max_iter: 400,
            x_tol: 1e-6,
            f_tol: 1e-12,
            initial_step: 0.4,
        }
    }
}

/// Per-coordinate box `[lower, upper]` with `0 < lower < upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl PositiveBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return param_err("bounds must be non-empty and of equal length");
        }
        for (lo, hi) in lower.iter().zip(&upper) {
            if !(lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo < hi) {
                return param_err(format!("invalid positive bound [{lo}, {hi}]"));
            }
        }
        Ok(PositiveBounds { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn clamp_log(&self, theta: &mut [f64]) {
        for (j, t) in theta.iter_mut().enumerate() {
            *t = t.clamp(self.lower[j].ln(), self.upper[j].ln());
        }
    }

    /// Whether `x` sits on (within `rel` of) a bound, per coordinate.
    pub fn at_bound(&self, x: &[f64], rel: f64) -> Vec<bool> {
        x.iter()
            .enumerate()
            .map(|(j, v)| *v <= self.lower[j] * (1.0 + rel) || *v >= self.upper[j] * (1.0 - rel))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Minimises `f(h)` over the box starting from `start`.
///
/// Non-finite objective values are treated as `+inf`.
pub fn nelder_mead_min<F>(
    mut f: F,
    start: &[f64],
    bounds: &PositiveBounds,
    settings: &NelderMeadSettings,
) -> Result<NelderMeadResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let d = bounds.dim();
    if start.len() != d {
        return param_err("start point has the wrong dimension");
    }
    if start.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return param_err("start point must be positive");
    }
    let mut eval = |theta: &[f64]| {
        let h: Vec<f64> = theta.iter().map(|t| t.exp()).collect();
        let v = f(&h);
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };

    let mut x0: Vec<f64> = start.iter().map(|v| v.ln()).collect();
    bounds.clamp_log(&mut x0);
    let mut simplex = vec![x0.clone()];
    for j in 0..d {
        let mut v = x0.clone();
        v[j] += settings.initial_step;
        bounds.clamp_log(&mut v);
        if (v[j] - x0[j]).abs() < 1e-12 {
            v[j] -= settings.initial_step;
            bounds.clamp_log(&mut v);
        }
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| eval(v)).collect();

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iter {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let diameter = simplex[1..]
            .iter()
            .map(|v| v.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = values[d] - values[0];
        if diameter < settings.x_tol || (spread.is_finite() && spread.abs() < settings.f_tol) {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> = (0..d)
            .map(|j| simplex[..d].iter().map(|v| v[j]).sum::<f64>() / d as f64)
            .collect();
        let toward = |coef: f64| -> Vec<f64> {
            let mut p: Vec<f64> = (0..d)
                .map(|j| centroid[j] + coef * (simplex[d][j] - centroid[j]))
                .collect();
            bounds.clamp_log(&mut p);
            p
        };

        let xr = toward(-alpha);
        let fr = eval(&xr);
        if fr < values[0] {
            let xe = toward(-gamma);
            let fe = eval(&xe);
            if fe < fr {
                simplex[d] = xe;
                values[d] = fe;
            } else {
                simplex[d] = xr;
                values[d] = fr;
            }
            continue;
        }
        if fr < values[d - 1] {
            simplex[d] = xr;
            values[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < values[d] {
            let xc = toward(-rho);
            let fc = eval(&xc);
            (xc, fc)
        } else {
            let xc = toward(rho);
            let fc = eval(&xc);
            (xc, fc)
        };
        if fc < values[d].min(fr) {
            simplex[d] = xc;
            values[d] = fc;
            continue;
        }
        for i in 1..=d {
            for j in 0..d {
                simplex[i][j] = simplex[0][j] + sigma * (simplex[i][j] - simplex[0][j]);
            }
            values[i] = eval(&simplex[i]);
        }
    }

    let best = (0..=d)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    Ok(NelderMeadResult {
        x: simplex[best].iter().map(|t| t.exp()).collect(),
        value: values[best],
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn finds_interior_minimum() {
        let b = PositiveBounds::new(vec![1e-3, 1e-3], vec![10.0, 10.0]).unwrap();
        let f = |h: &[f64]| (h[0].ln() - 0.5f64.ln()).powi(2) + 3.0 * (h[1].ln() - 2.0f64.ln()).powi(2);
        let r = nelder_mead_min(f, &[1.0, 1.0], &b, &NelderMeadSettings::default()).unwrap();
        assert!(r.converged);
        assert_relative_eq!(r.x[0], 0.5, max_relative = 1e-4);
        assert_relative_eq!(r.x[1], 2.0, max_relative = 1e-4);
    }

    #[test]
    fn respects_bounds() {
        let b = PositiveBounds::new(vec![0.1], vec![5.0]).unwrap();
        let r = nelder_mead_min(|h| h[0], &[1.0], &b, &NelderMeadSettings::default()).unwrap();
        assert_relative_eq!(r.x[0], 0.1, max_relative = 1e-9);
        assert!(b.at_bound(&r.x, 1e-6)[0]);
    }

    #[test]
    fn treats_nan_as_infinite() {
        let b = PositiveBounds::new(vec![0.01], vec![100.0]).unwrap();
        let f = |h: &[f64]| if h[0] > 3.0 { f64::NAN } else { (h[0] - 2.0).powi(2) };
        let r = nelder_mead_min(f, &[1.0], &b, &NelderMeadSettings::default()).unwrap();
        assert_relative_eq!(r.x[0], 2.0, max_relative = 1e-4);
    }

    #[test]
    fn rejects_bad_bounds() {
        assert!(PositiveBounds::new(vec![0.0], vec![1.0]).is_err());
        assert!(PositiveBounds::new(vec![2.0], vec![1.0]).is_err());
    }
}
