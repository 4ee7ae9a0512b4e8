//! Random variate generation for the simulation targets.

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Beta, Distribution, Normal, StandardNormal};

use crate::ebkernel::Interval;
use crate::error::{param_err, Error, Result};

/// Consecutive rejections after which the truncated sampler gives up.
pub const REJECTION_CAP: u64 = 1_000_000;

pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, shape1: f64, shape2: f64) -> Result<f64> {
    let dist = Beta::new(shape1, shape2)
        .map_err(|e| Error::Parameter(format!("beta({shape1}, {shape2}): {e}")))?;
    Ok(dist.sample(rng))
}

/// Beta(shape1, shape2) rescaled onto `interval`.
pub fn sample_pert<R: Rng + ?Sized>(
    rng: &mut R,
    interval: Interval,
    shape1: f64,
    shape2: f64,
) -> Result<f64> {
    let t = sample_beta(rng, shape1, shape2)?;
    Ok(interval.a() + interval.width() * t)
}

pub fn sample_normal<R: Rng + ?Sized>(rng: &mut R, mean: f64, sd: f64) -> Result<f64> {
    let dist = Normal::new(mean, sd)
        .map_err(|e| Error::Parameter(format!("normal({mean}, {sd}): {e}")))?;
    Ok(dist.sample(rng))
}

/// Logistic transform of a normal draw; lands in (0, 1).
pub fn sample_logit_normal<R: Rng + ?Sized>(rng: &mut R, mu: f64, sigma: f64) -> Result<f64> {
    let z = sample_normal(rng, mu, sigma)?;
    Ok(1.0 / (1.0 + (-z).exp()))
}

/// Multivariate normal with a precomputed Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct MvNormal {
    mean: Vec<f64>,
    /// Lower-triangular factor, row-major `d×d`.
    chol: Vec<f64>,
    log_norm: f64,
}

impl MvNormal {
    /// `cov` is row-major `d×d`; it must be symmetric positive definite.
    pub fn new(mean: Vec<f64>, cov: &[f64]) -> Result<Self> {
        let d = mean.len();
        if d == 0 || cov.len() != d * d {
            return param_err("covariance shape does not match the mean");
        }
        for i in 0..d {
            for j in 0..i {
                if (cov[i * d + j] - cov[j * d + i]).abs() > 1e-12 * (1.0 + cov[i * d + j].abs()) {
                    return param_err("covariance is not symmetric");
                }
            }
        }
        let mut l = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..=i {
                let mut s = cov[i * d + j];
                for k in 0..j {
                    s -= l[i * d + k] * l[j * d + k];
                }
                if i == j {
                    if !(s > 0.0) {
                        return param_err("covariance is not positive definite");
                    }
                    l[i * d + i] = s.sqrt();
                } else {
                    l[i * d + j] = s / l[j * d + j];
                }
            }
        }
        let log_det: f64 = (0..d).map(|i| 2.0 * l[i * d + i].ln()).sum();
        let log_norm = -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
        Ok(MvNormal {
            mean,
            chol: l,
            log_norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let d = self.dim();
        let z: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        (0..d)
            .map(|i| self.mean[i] + (0..=i).map(|k| self.chol[i * d + k] * z[k]).sum::<f64>())
            .collect()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        // Forward substitution L y = x - mean.
        let mut y = vec![0.0; d];
        for i in 0..d {
            let mut s = x[i] - self.mean[i];
            for k in 0..i {
                s -= self.chol[i * d + k] * y[k];
            }
            y[i] = s / self.chol[i * d + i];
        }
        self.log_norm - 0.5 * y.iter().map(|v| v * v).sum::<f64>()
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.log_density(x).exp()
    }
}

pub fn sample_mvnormal<R: Rng + ?Sized>(rng: &mut R, dist: &MvNormal) -> Vec<f64> {
    dist.sample(rng)
}

/// Normal draw conditioned on the box, by rejection.
pub fn sample_truncated_mvnormal<R: Rng + ?Sized>(
    rng: &mut R,
    dist: &MvNormal,
    bounds: &[Interval],
) -> Result<Vec<f64>> {
    if bounds.len() != dist.dim() {
        return param_err("truncation box dimension does not match the distribution");
    }
    for _ in 0..REJECTION_CAP {
        let x = dist.sample(rng);
        if x.iter().zip(bounds).all(|(v, iv)| iv.contains(*v)) {
            return Ok(x);
        }
    }
    Err(Error::RejectionCap(REJECTION_CAP))
}

/// Picks a component by weight and draws from it; returns the component index too.
pub fn sample_mixture<R, T, F>(rng: &mut R, weights: &[f64], mut component: F) -> Result<(usize, T)>
where
    R: Rng + ?Sized,
    F: FnMut(&mut R, usize) -> Result<T>,
{
    let idx = WeightedIndex::new(weights)
        .map_err(|e| Error::Parameter(format!("mixture weights {weights:?}: {e}")))?;
    let k = idx.sample(rng);
    Ok((k, component(rng, k)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::rng::stream;
    use statrs::distribution::{Beta as BetaDist, ContinuousCDF, Normal as NormalDist};

    fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
        xs.sort_by(f64::total_cmp);
        let n = xs.len() as f64;
        xs.iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = cdf(x);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max)
    }

    // Asymptotic 1% critical value of the one-sample KS statistic.
    fn ks_crit(n: usize) -> f64 {
        1.628 / (n as f64).sqrt()
    }

    #[test]
    fn beta_passes_ks() {
        let mut rng = stream(11, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| sample_beta(&mut rng, 2.0, 4.0).unwrap()).collect();
        let dist = BetaDist::new(2.0, 4.0).unwrap();
        assert!(ks_statistic(xs, |x| dist.cdf(x)) < ks_crit(10_000));
    }

    #[test]
    fn pert_passes_ks_and_has_scaled_mean() {
        let mut rng = stream(12, 0);
        let iv = Interval::new(1.0, 5.0).unwrap();
        let xs: Vec<f64> = (0..100_000).map(|_| sample_pert(&mut rng, iv, 2.0, 4.0).unwrap()).collect();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - (1.0 + 4.0 / 3.0)).abs() < 0.02, "{mean}");
        let dist = BetaDist::new(2.0, 4.0).unwrap();
        let sub = xs[..10_000].to_vec();
        assert!(ks_statistic(sub, |x| dist.cdf((x - 1.0) / 4.0)) < ks_crit(10_000));
    }

    #[test]
    fn logit_normal_passes_ks_and_stays_in_unit_interval() {
        let mut rng = stream(13, 0);
        let xs: Vec<f64> = (0..10_000).map(|_| sample_logit_normal(&mut rng, 0.25, 3.0).unwrap()).collect();
        assert!(xs.iter().all(|&x| x > 0.0 && x < 1.0));
        let normal = NormalDist::new(0.25, 3.0).unwrap();
        assert!(ks_statistic(xs, |x| normal.cdf((x / (1.0 - x)).ln())) < ks_crit(10_000));
    }

    #[test]
    fn mvnormal_moments() {
        let dist = MvNormal::new(vec![1.0, -2.0], &[2.0, 0.6, 0.6, 0.5]).unwrap();
        let mut rng = stream(14, 0);
        let n = 100_000;
        let xs: Vec<Vec<f64>> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let m0 = xs.iter().map(|x| x[0]).sum::<f64>() / n as f64;
        let m1 = xs.iter().map(|x| x[1]).sum::<f64>() / n as f64;
        let c01 = xs.iter().map(|x| (x[0] - m0) * (x[1] - m1)).sum::<f64>() / n as f64;
        assert!((m0 - 1.0).abs() < 0.02 && (m1 + 2.0).abs() < 0.01);
        assert!((c01 - 0.6).abs() < 0.02, "{c01}");
    }

    #[test]
    fn mvnormal_density_matches_closed_form() {
        let dist = MvNormal::new(vec![0.0, 0.0], &[1.0, 0.8, 0.8, 1.0]).unwrap();
        let (x, y) = (0.3, -0.7);
        let det: f64 = 1.0 - 0.64;
        let q = (x * x - 1.6 * x * y + y * y) / det;
        let expected = (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt());
        assert!((dist.density(&[x, y]) - expected).abs() < 1e-14);
    }

    #[test]
    fn rejects_indefinite_covariance() {
        assert!(MvNormal::new(vec![0.0, 0.0], &[1.0, 2.0, 2.0, 1.0]).is_err());
    }

    #[test]
    fn truncated_normal_keeps_correlation() {
        let dist = MvNormal::new(vec![0.0, 0.0], &[1.0, 0.8, 0.8, 1.0]).unwrap();
        let bx = vec![Interval::new(-1.0, 5.0).unwrap(); 2];
        let mut rng = stream(15, 0);
        let n = 100_000;
        let xs: Vec<Vec<f64>> = (0..n)
            .map(|_| sample_truncated_mvnormal(&mut rng, &dist, &bx).unwrap())
            .collect();
        assert!(xs.iter().all(|x| x.iter().all(|&v| (-1.0..=5.0).contains(&v))));
        let m0 = xs.iter().map(|x| x[0]).sum::<f64>() / n as f64;
        let m1 = xs.iter().map(|x| x[1]).sum::<f64>() / n as f64;
        let cov = xs.iter().map(|x| (x[0] - m0) * (x[1] - m1)).sum::<f64>() / n as f64;
        let v0 = xs.iter().map(|x| (x[0] - m0).powi(2)).sum::<f64>() / n as f64;
        let v1 = xs.iter().map(|x| (x[1] - m1).powi(2)).sum::<f64>() / n as f64;
        assert!(cov / (v0 * v1).sqrt() > 0.5);
    }

    #[test]
    fn truncated_sampler_gives_up() {
        let dist = MvNormal::new(vec![0.0], &[1.0]).unwrap();
        let bx = vec![Interval::new(50.0, 51.0).unwrap()];
        let mut rng = stream(16, 0);
        assert_eq!(
            sample_truncated_mvnormal(&mut rng, &dist, &bx),
            Err(Error::RejectionCap(REJECTION_CAP))
        );
    }

    #[test]
    fn mixture_weights_are_respected() {
        let mut rng = stream(17, 0);
        let n = 100_000;
        let hits = (0..n)
            .filter(|_| sample_mixture(&mut rng, &[0.6, 0.4], |_, k| Ok(k)).unwrap().0 == 0)
            .count();
        assert!((hits as f64 / n as f64 - 0.6).abs() < 0.01);
    }
}
