use statrs::function::gamma::gamma;

use super::StatsError;

/// Exponent in the shape-from-coefficient-of-variation approximation.
pub const SHAPE_EXPONENT: f64 = -1.086;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeibullParams {
    pub shape: f64,
    /// m/s
    pub scale: f64,
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self, StatsError> {
        if !(shape > 0.0 && shape.is_finite() && scale > 0.0 && scale.is_finite()) {
            return Err(StatsError::Domain(format!("Weibull needs k > 0 and c > 0 (got k = {shape}, c = {scale})")));
        }
        Ok(Self { shape, scale })
    }

    pub fn pdf(&self, u: f64) -> f64 {
        weibull_pdf(u, self)
    }

    pub fn cdf(&self, u: f64) -> f64 {
        if u <= 0.0 { 0.0 } else { -(-(u / self.scale).powf(self.shape)).exp_m1() }
    }

    /// E[Uⁿ] = cⁿ·Γ(1 + n/k).
    pub fn raw_moment(&self, n: f64) -> f64 {
        self.scale.powf(n) * gamma(1.0 + n / self.shape)
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1.0)
    }

    pub fn std_dev(&self) -> f64 {
        (self.raw_moment(2.0) - self.mean().powi(2)).max(0.0).sqrt()
    }

    /// Speed beyond which the remaining probability is below `tail`.
    pub fn quantile_upper(&self, tail: f64) -> f64 {
        self.scale * (-tail.ln()).powf(1.0 / self.shape)
    }
}

/// k = (σ/μ)^−1.086, c = μ / Γ(1 + 1/k).
pub fn fit_weibull(mean: f64, std_dev: f64) -> Result<WeibullParams, StatsError> {
    if !(mean > 0.0 && std_dev > 0.0 && mean.is_finite() && std_dev.is_finite()) {
        return Err(StatsError::Domain(format!("mean and standard deviation must be positive (got {mean}, {std_dev})")));
    }
    let ratio = std_dev / mean;
    let shape = if ratio == 1.0 { 1.0 } else { ratio.powf(SHAPE_EXPONENT) };
    WeibullParams::new(shape, mean / gamma(1.0 + 1.0 / shape))
}

pub fn weibull_pdf(u: f64, p: &WeibullParams) -> f64 {
    let (k, c) = (p.shape, p.scale);
    if u < 0.0 {
        return 0.0;
    }
    if u == 0.0 {
        return match k {
            k if k > 1.0 => 0.0,
            k if k == 1.0 => 1.0 / c,
            _ => f64::INFINITY,
        };
    }
    let x = u / c;
    (k / c) * x.powf(k - 1.0) * (-x.powf(k)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy_stats::quadrature::integrate;
    use proptest::prelude::*;

    #[test]
    fn gamma_matches_factorials() {
        let mut fact = 1.0;
        for n in 1..=10u32 {
            if n > 1 {
                fact *= (n - 1) as f64;
            }
            assert!((gamma(n as f64) - fact).abs() <= 1e-12 * fact, "n = {n}");
        }
    }

    #[test]
    fn unit_cv_gives_exponential() {
        let p = fit_weibull(6.0, 6.0).unwrap();
        assert_eq!(p.shape, 1.0);
        assert_eq!(p.scale, 6.0);
        assert_eq!(weibull_pdf(6.0, &p), (1.0 / 6.0) * (-1.0f64).exp());
    }

    #[test]
    fn refit_from_reference_parameters() {
        let truth = WeibullParams::new(1.195, 4.837).unwrap();
        let fit = fit_weibull(truth.mean(), truth.std_dev()).unwrap();
        assert!(((fit.shape - truth.shape) / truth.shape).abs() < 0.03, "{fit:?}");
        assert!((fit.mean() - truth.mean()).abs() < 1e-12);
    }

    #[test]
    fn pdf_special_points() {
        let p = WeibullParams::new(2.0, 7.0).unwrap();
        assert_eq!(weibull_pdf(0.0, &p), 0.0);
        // d/du [u·exp(−u²/c²)] = 0 at u = c/√2
        let mode = 7.0 / 2f64.sqrt();
        let h = 1e-5;
        assert!(weibull_pdf(mode, &p) > weibull_pdf(mode - 1e-4, &p));
        assert!(weibull_pdf(mode, &p) > weibull_pdf(mode + 1e-4, &p));
        let slope = (weibull_pdf(mode + h, &p) - weibull_pdf(mode - h, &p)) / (2.0 * h);
        assert!(slope.abs() < 1e-9);
    }

    #[test]
    fn pdf_normalises() {
        for (k, c) in [(1.195, 4.837), (2.0, 8.0), (3.5, 10.0), (1.0, 5.0)] {
            let p = WeibullParams::new(k, c).unwrap();
            let top = p.quantile_upper(1e-18);
            let total = integrate(|u| weibull_pdf(u, &p), 0.0, top, 1e-10, 0.0).unwrap().value;
            assert!((total - 1.0).abs() < 1e-6, "k = {k}: {total}");
        }
    }

    #[test]
    fn rejects_non_positive_inputs() {
        assert!(fit_weibull(0.0, 1.0).is_err());
        assert!(fit_weibull(5.0, -1.0).is_err());
        assert!(WeibullParams::new(1.0, 0.0).is_err());
    }

    proptest! {
        #[test]
        fn pdf_integrates_to_cdf(k in 0.8f64..4.0, c in 2.0f64..12.0, u in 0.5f64..25.0) {
            let p = WeibullParams::new(k, c).unwrap();
            let q = integrate(|x| weibull_pdf(x, &p), 0.0, u, 1e-12, 1e-13).unwrap().value;
            prop_assert!((q - p.cdf(u)).abs() < 1e-9, "{q} vs {}", p.cdf(u));
        }

        #[test]
        fn pdf_non_negative_and_cdf_monotone(k in 0.5f64..5.0, c in 1.0f64..15.0, a in 0.0f64..30.0, d in 0.0f64..5.0) {
            let p = WeibullParams::new(k, c).unwrap();
            prop_assert!(p.pdf(a) >= 0.0);
            prop_assert!(p.cdf(a + d) >= p.cdf(a));
        }
    }
}
