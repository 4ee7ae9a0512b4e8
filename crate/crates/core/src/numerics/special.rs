/// Natural logarithm of the gamma function for positive arguments.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `ln B(r, s) = lnΓ(r) + lnΓ(s) − lnΓ(r + s)`.
#[inline]
pub fn ln_beta(r: f64, s: f64) -> f64 {
    ln_gamma(r) + ln_gamma(s) - ln_gamma(r + s)
}

/// `ln Σ exp(v_k)`, returning `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    if max == f64::INFINITY {
        return max;
    }
    let mut acc = NeumaierSum::default();
    for &v in values {
        acc.add((v - max).exp());
    }
    max + acc.total().ln()
}

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.compensation += (self.sum - t) + v;
        } else {
            self.compensation += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ln_gamma_known_values() {
        assert_relative_eq!(ln_gamma(1.0), 0.0, epsilon = 1e-15);
        assert_relative_eq!(ln_gamma(5.0), 24f64.ln(), epsilon = 1e-14);
        assert_relative_eq!(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln(), epsilon = 1e-14);
        // lnΓ(1e6 + 1) = ln(10^6!) from Stirling's series, far past factorial overflow
        let z: f64 = 1e6;
        let stirling = z * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI * z).ln() + 1.0 / (12.0 * z);
        assert_relative_eq!(ln_gamma(z + 1.0), stirling, max_relative = 1e-14);
    }

    #[test]
    fn ln_beta_closed_forms() {
        // B(2,2) = 1/6, B(1.5,1.5) = π/8
        assert_relative_eq!(ln_beta(2.0, 2.0), (1.0f64 / 6.0).ln(), epsilon = 1e-14);
        assert_relative_eq!(ln_beta(1.5, 1.5), (std::f64::consts::PI / 8.0).ln(), epsilon = 1e-14);
    }

    #[test]
    fn log_sum_exp_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert_relative_eq!(log_sum_exp(&[1000.0, 1000.0]), 1000.0 + 2f64.ln(), epsilon = 1e-12);
        assert_relative_eq!(log_sum_exp(&[-1000.0, f64::NEG_INFINITY]), -1000.0);
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.total(), 2.0);
    }
}
