//! Exact GP regression in one input with a squared-exponential kernel plus
//! white noise and a constant prior mean.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::StatsError;

/// Larger training sets are thinned by stride after sorting by input.
pub const MAX_TRAINING_POINTS: usize = 400;

const JITTER_STEPS: [f64; 7] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-5, 1e-4];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpHyper {
    pub signal_variance: f64,
    /// m/s
    pub length_scale: f64,
    pub noise_variance: f64,
}

impl GpHyper {
    fn kernel(&self, a: f64, b: f64) -> f64 {
        let d = (a - b) / self.length_scale;
        self.signal_variance * (-0.5 * d * d).exp()
    }
}

#[derive(Debug, Clone)]
pub struct GpModel {
    pub inputs: Vec<f64>,
    pub targets: Vec<f64>,
    pub hyper: GpHyper,
    pub prior_mean: f64,
    /// Diagonal jitter that was needed on top of the noise variance.
    pub jitter: f64,
    pub log_marginal_likelihood: f64,
    chol: Cholesky<f64, Dyn>,
    alpha: DVector<f64>,
}

fn factor(inputs: &[f64], hyper: &GpHyper) -> Result<(Cholesky<f64, Dyn>, f64), StatsError> {
    let n = inputs.len();
    let k = DMatrix::from_fn(n, n, |i, j| hyper.kernel(inputs[i], inputs[j]));
    let scale = hyper.signal_variance.max(hyper.noise_variance);
    for j in JITTER_STEPS {
        let mut m = k.clone();
        for i in 0..n {
            m[(i, i)] += hyper.noise_variance + j * scale;
        }
        if let Some(c) = Cholesky::new(m) {
            return Ok((c, j * scale));
        }
    }
    Err(StatsError::SingularCovariance { max_jitter: JITTER_STEPS[JITTER_STEPS.len() - 1] * scale })
}

impl GpModel {
    /// Fits with fixed hyperparameters and prior mean.
    pub fn with_hyper(inputs: Vec<f64>, targets: Vec<f64>, hyper: GpHyper, prior_mean: f64) -> Result<Self, StatsError> {
        if inputs.len() != targets.len() || inputs.is_empty() {
            return Err(StatsError::InsufficientData(format!("{} inputs, {} targets", inputs.len(), targets.len())));
        }
        if !(hyper.signal_variance > 0.0 && hyper.length_scale > 0.0 && hyper.noise_variance >= 0.0) {
            return Err(StatsError::Domain(format!("invalid GP hyperparameters {hyper:?}")));
        }
        let (chol, jitter) = factor(&inputs, &hyper)?;
        let resid = DVector::from_iterator(targets.len(), targets.iter().map(|y| y - prior_mean));
        let alpha = chol.solve(&resid);
        let n = inputs.len() as f64;
        let log_det: f64 = chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
        let lml = -0.5 * resid.dot(&alpha) - 0.5 * log_det - 0.5 * n * (2.0 * std::f64::consts::PI).ln();
        Ok(Self { inputs, targets, hyper, prior_mean, jitter, log_marginal_likelihood: lml, chol, alpha })
    }

    fn cross(&self, u: f64) -> DVector<f64> {
        DVector::from_iterator(self.inputs.len(), self.inputs.iter().map(|&x| self.hyper.kernel(u, x)))
    }

    pub fn mean(&self, u: f64) -> f64 {
        self.prior_mean + self.cross(u).dot(&self.alpha)
    }

    /// Posterior standard deviation of the latent function (noise excluded).
    pub fn latent_std_dev(&self, u: f64) -> f64 {
        let k = self.cross(u);
        let v = self.chol.l().solve_lower_triangular(&k).expect("factor is non-singular");
        (self.hyper.signal_variance - v.dot(&v)).max(0.0).sqrt()
    }

    /// Predictive standard deviation of an observed Cp at wind speed `u`.
    pub fn std_dev(&self, u: f64) -> f64 {
        self.latent_std_dev(u).hypot(self.hyper.noise_variance.sqrt())
    }
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Picks every point when small enough, otherwise an evenly strided subset of
/// the input-sorted points.
pub fn thin(points: &[(f64, f64)], max: usize) -> Vec<(f64, f64)> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    if sorted.len() <= max {
        return sorted;
    }
    (0..max).map(|i| sorted[i * (sorted.len() - 1) / (max - 1)]).collect()
}

/// Hyperparameters by log-marginal-likelihood: a grid over length scale
/// [0.25, 4] m/s and four decades each of signal and noise variance
/// (relative to the target variance), then one coordinate-descent pass.
pub fn fit_gp(points: &[(f64, f64)]) -> Result<GpModel, StatsError> {
    if points.iter().any(|(u, c)| !u.is_finite() || !c.is_finite()) {
        return Err(StatsError::Domain("non-finite GP training point".into()));
    }
    let pts = thin(points, MAX_TRAINING_POINTS);
    let mut distinct = pts.iter().map(|p| p.0).collect::<Vec<_>>();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(StatsError::InsufficientData(format!("GP needs two distinct inputs, got {}", distinct.len())));
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let n = ys.len() as f64;
    let mean = ys.iter().sum::<f64>() / n;
    let var = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / n).max(1e-8);

    let eval = |h: GpHyper| GpModel::with_hyper(xs.clone(), ys.clone(), h, mean).ok();
    let better = |a: &Option<GpModel>, b: &GpModel| a.as_ref().is_none_or(|a| b.log_marginal_likelihood > a.log_marginal_likelihood);

    let mut best: Option<GpModel> = None;
    for &l in &log_grid(0.25, 4.0, 9) {
        for &s in &log_grid(1e-2 * var, 1e2 * var, 5) {
            for &e in &log_grid(1e-4 * var, 1.0 * var, 5) {
                if let Some(m) = eval(GpHyper { signal_variance: s, length_scale: l, noise_variance: e }) {
                    if better(&best, &m) {
                        best = Some(m);
                    }
                }
            }
        }
    }
    let mut best = best.ok_or(StatsError::SingularCovariance { max_jitter: JITTER_STEPS[JITTER_STEPS.len() - 1] })?;

    for coord in 0..3 {
        for factor in [0.5, 0.7071, 0.8409, 1.1892, 1.4142, 2.0] {
            let mut h = best.hyper;
            match coord {
                0 => h.length_scale = (h.length_scale * factor).clamp(0.25, 4.0),
                1 => h.signal_variance *= factor,
                _ => h.noise_variance *= factor,
            }
            if let Some(m) = eval(h) {
                if m.log_marginal_likelihood > best.log_marginal_likelihood {
                    best = m;
                }
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn h(noise: f64) -> GpHyper {
        GpHyper { signal_variance: 0.04, length_scale: 1.5, noise_variance: noise }
    }

    #[test]
    fn noiseless_limit_interpolates() {
        let xs = vec![5.0, 7.0, 10.0];
        let ys = vec![0.3, 0.42, 0.35];
        let m = GpModel::with_hyper(xs.clone(), ys.clone(), h(1e-12), 0.0).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert!((m.mean(*x) - y).abs() < 1e-6);
            assert!(m.std_dev(*x) < 1e-4);
        }
    }

    #[test]
    fn mean_matches_dense_solve() {
        let xs = [5.0, 7.5, 9.0];
        let ys = [0.31, 0.44, 0.40];
        let hy = GpHyper { signal_variance: 0.02, length_scale: 2.0, noise_variance: 1e-3 };
        let m = GpModel::with_hyper(xs.to_vec(), ys.to_vec(), hy, 0.0).unwrap();
        let k = |a: f64, b: f64| 0.02 * (-(a - b) * (a - b) / 8.0).exp();
        // (K + σ²I) α = y by Cramer's rule
        let a: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| k(xs[i], xs[j]) + if i == j { 1e-3 } else { 0.0 }).collect()).collect();
        let det = |m: &Vec<Vec<f64>>| {
            m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
        };
        let d = det(&a);
        let alpha: Vec<f64> = (0..3)
            .map(|c| {
                let mut mc = a.clone();
                for r in 0..3 {
                    mc[r][c] = ys[r];
                }
                det(&mc) / d
            })
            .collect();
        let u = 8.2;
        let expected: f64 = (0..3).map(|i| k(u, xs[i]) * alpha[i]).sum();
        assert!((m.mean(u) - expected).abs() < 1e-12, "{} vs {expected}", m.mean(u));
    }

    #[test]
    fn duplicate_inputs_average() {
        let m = fit_gp(&[(6.0, 0.30), (6.0, 0.40), (9.0, 0.35), (12.0, 0.33)]).unwrap();
        let mu = m.mean(6.0);
        assert!(mu > 0.30 && mu < 0.40, "{mu}");
    }

    #[test]
    fn sigma_grows_away_from_data() {
        let pts: Vec<(f64, f64)> = (0..30).map(|i| (5.0 + 0.2 * i as f64, 0.4 - 0.002 * (i as f64 - 15.0).powi(2))).collect();
        let m = fit_gp(&pts).unwrap();
        let mut prev = m.latent_std_dev(10.8);
        for i in 1..40 {
            let s = m.latent_std_dev(10.8 + 0.1 * i as f64);
            assert!(s >= prev - 1e-12);
            prev = s;
        }
    }

    #[test]
    fn dense_noiseless_data_gives_small_sigma() {
        let pts: Vec<(f64, f64)> = (0..60).map(|i| {
            let u = 4.0 + 0.2 * i as f64;
            (u, 0.3 + 0.1 * (u / 3.0).sin())
        }).collect();
        let m = fit_gp(&pts).unwrap();
        for u in [5.1, 8.3, 12.7] {
            assert!(m.std_dev(u) < 1e-3, "{}", m.std_dev(u));
            assert!((m.mean(u) - (0.3 + 0.1 * (u / 3.0).sin())).abs() < 1e-3);
        }
    }

    #[test]
    fn predictive_sigma_recovers_scatter() {
        use rand::SeedableRng;
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let noise = Normal::new(0.0, 0.03).unwrap();
        let pts: Vec<(f64, f64)> = (0..400)
            .map(|i| {
                let u = 4.0 + 12.0 * i as f64 / 399.0;
                (u, 0.35 + 0.05 * (u / 3.0).sin() + noise.sample(&mut rng))
            })
            .collect();
        let m = fit_gp(&pts).unwrap();
        for u in [5.0, 9.0, 14.0] {
            let s = m.std_dev(u);
            assert!((s - 0.03).abs() < 0.0045, "{s}");
            assert!(m.latent_std_dev(u) < 0.01);
        }
    }

    #[test]
    fn thinning_keeps_extremes() {
        let pts: Vec<(f64, f64)> = (0..1000).rev().map(|i| (i as f64, 0.0)).collect();
        let t = thin(&pts, 400);
        assert_eq!(t.len(), 400);
        assert_eq!(t[0].0, 0.0);
        assert_eq!(t[399].0, 999.0);
    }

    #[test]
    fn degenerate_inputs_rejected() {
        assert!(matches!(fit_gp(&[(5.0, 0.3), (5.0, 0.4)]), Err(StatsError::InsufficientData(_))));
        assert!(fit_gp(&[]).is_err());
    }

    proptest! {
        #[test]
        fn predictive_sigma_non_negative(u in -5.0f64..25.0, noise in 1e-8f64..1e-2) {
            let m = GpModel::with_hyper(vec![5.0, 6.0, 6.0, 11.0], vec![0.3, 0.35, 0.36, 0.2], h(noise), 0.3).unwrap();
            prop_assert!(m.latent_std_dev(u) >= 0.0);
            prop_assert!(m.latent_std_dev(u) <= 0.2 + 1e-12);
            prop_assert!(m.std_dev(u) >= noise.sqrt() - 1e-15);
            prop_assert!(m.std_dev(u) <= (0.04 + noise).sqrt() + 1e-12);
        }
    }
}
