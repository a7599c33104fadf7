//! Wind statistics and expected-energy estimates: Weibull wind model, a GP
//! effective power-coefficient curve, and binned power curves.

mod gp;
pub mod quadrature;
mod weibull;

pub use gp::{fit_gp, thin, GpHyper, GpModel, MAX_TRAINING_POINTS};
pub use weibull::{fit_weibull, weibull_pdf, WeibullParams, SHAPE_EXPONENT};

use crate::environment::StepOutcome;
use crate::turbine::BETZ_LIMIT;

pub const HOURS_PER_YEAR: f64 = 8760.0;
pub const ENERGY_REL_TOL: f64 = 1e-6;

#[derive(Debug, thiserror::Error)]
pub enum StatsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge (estimate {value}, error {error})")]
    QuadratureFailure { value: f64, error: f64 },
    #[error("covariance not positive definite even with jitter {max_jitter}")]
    SingularCovariance { max_jitter: f64 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

/// Constants of the energy integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySetup {
    /// s
    pub period: f64,
    /// kg/m³
    pub air_density: f64,
    /// m²
    pub rotor_area: f64,
    /// m/s
    pub wind_range: (f64, f64),
    /// Cap on ½ρA·Cp·u³ (W), if any.
    pub power_cap: Option<f64>,
}

impl EnergySetup {
    pub fn annual(air_density: f64, rotor_area: f64, wind_range: (f64, f64)) -> Self {
        Self { period: HOURS_PER_YEAR * 3600.0, air_density, rotor_area, wind_range, power_cap: None }
    }
}

/// Expected energy in Wh:
/// `ΔT·∫ min(½ρA·μ(u)·u³, cap)·f_U(u) du` over the wind range.
pub fn expected_energy(mu_cp: impl Fn(f64) -> f64, weibull: &WeibullParams, setup: &EnergySetup) -> Result<f64, StatsError> {
    let half_rho_a = 0.5 * setup.air_density * setup.rotor_area;
    let cap = setup.power_cap.unwrap_or(f64::INFINITY);
    let integrand = |u: f64| (half_rho_a * mu_cp(u) * u.powi(3)).min(cap) * weibull.pdf(u);
    let (lo, hi) = setup.wind_range;
    let q = quadrature::integrate(integrand, lo, hi, ENERGY_REL_TOL, 0.0)?;
    Ok(q.value * setup.period / 3600.0)
}

/// Expected energy with the GP mean clamped to [0, Betz].
pub fn expected_annual_energy(gp: &GpModel, weibull: &WeibullParams, setup: &EnergySetup) -> Result<f64, StatsError> {
    expected_energy(|u| gp.mean(u).clamp(0.0, BETZ_LIMIT), weibull, setup)
}

/// ∫ σ(u)·f_U(u) du over `wind_range`.
pub fn expected_sigma_of(sigma: impl Fn(f64) -> f64, weibull: &WeibullParams, wind_range: (f64, f64)) -> Result<f64, StatsError> {
    Ok(quadrature::integrate(|u| sigma(u) * weibull.pdf(u), wind_range.0, wind_range.1, ENERGY_REL_TOL, 1e-15)?.value)
}

pub fn expected_sigma(gp: &GpModel, weibull: &WeibullParams, wind_range: (f64, f64)) -> Result<f64, StatsError> {
    expected_sigma_of(|u| gp.std_dev(u), weibull, wind_range)
}

/// One observation for the binned power curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpcSample {
    pub wind_speed: f64,
    pub cp: f64,
    /// W
    pub power: f64,
    pub rotor_speed: f64,
    pub pitch: f64,
    pub oaspl: Option<f64>,
}

impl From<&StepOutcome> for EpcSample {
    fn from(s: &StepOutcome) -> Self {
        Self {
            wind_speed: s.next_state.wind_speed,
            cp: s.cp,
            power: s.power,
            rotor_speed: s.next_state.rotor_speed,
            pitch: s.next_state.pitch,
            oaspl: s.oaspl,
        }
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

fn mean_std(xs: impl Iterator<Item = f64> + Clone) -> Option<MeanStd> {
    let n = xs.clone().count();
    if n == 0 {
        return None;
    }
    let mean = xs.clone().sum::<f64>() / n as f64;
    let var = xs.map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    Some(MeanStd { mean, std: var.sqrt() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpcBin {
    /// m/s
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    /// `None` for empty bins.
    pub cp: Option<MeanStd>,
    pub power: Option<MeanStd>,
    pub rotor_speed: Option<MeanStd>,
    pub pitch: Option<MeanStd>,
    pub oaspl: Option<MeanStd>,
}

impl EpcBin {
    pub fn center(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpcTable {
    pub bins: Vec<EpcBin>,
}

/// Bins `[lo + i·w, lo + (i+1)·w)` covering the range; the last bin also
/// takes the upper edge. Samples outside the range are ignored.
pub fn build_epc(samples: &[EpcSample], bin_width: f64, range: (f64, f64)) -> Result<EpcTable, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::InsufficientData("empty trajectory".into()));
    }
    if !(bin_width > 0.0 && range.1 > range.0) {
        return Err(StatsError::Domain(format!("bad binning: width {bin_width}, range {range:?}")));
    }
    let n = ((range.1 - range.0) / bin_width - 1e-9).ceil().max(1.0) as usize;
    let mut members: Vec<Vec<&EpcSample>> = vec![Vec::new(); n];
    for s in samples {
        if s.wind_speed < range.0 || s.wind_speed > range.1 {
            continue;
        }
        let i = (((s.wind_speed - range.0) / bin_width) as usize).min(n - 1);
        members[i].push(s);
    }
    let bins = members
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let field = |f: fn(&EpcSample) -> f64| mean_std(m.iter().map(|s| f(s)));
            let noise: Vec<f64> = m.iter().filter_map(|s| s.oaspl).collect();
            EpcBin {
                lower: range.0 + i as f64 * bin_width,
                upper: (range.0 + (i + 1) as f64 * bin_width).min(range.1),
                count: m.len(),
                cp: field(|s| s.cp),
                power: field(|s| s.power),
                rotor_speed: field(|s| s.rotor_speed),
                pitch: field(|s| s.pitch),
                oaspl: mean_std(noise.iter().copied()),
            }
        })
        .collect();
    Ok(EpcTable { bins })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_distr::{Distribution, Weibull};
    use statrs::function::gamma::gamma;

    fn setup() -> EnergySetup {
        EnergySetup::annual(1.225, std::f64::consts::PI * 46.5 * 46.5, (0.0, 0.0))
    }

    #[test]
    fn constant_cp_matches_third_moment() {
        let w = WeibullParams::new(1.195, 4.837).unwrap();
        let cp0 = 0.42;
        let s = EnergySetup { wind_range: (0.0, w.quantile_upper(1e-30)), ..setup() };
        let q = expected_energy(|_| cp0, &w, &s).unwrap();
        let closed = 0.5 * s.period / 3600.0 * s.air_density * s.rotor_area * cp0 * w.scale.powi(3) * gamma(1.0 + 3.0 / w.shape);
        assert!(((q - closed) / closed).abs() < 1e-5, "{q} vs {closed}");
    }

    #[test]
    fn third_moment_identity_by_monte_carlo() {
        let w = WeibullParams::new(1.195, 4.837).unwrap();
        let dist = Weibull::new(w.scale, w.shape).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        let n = 10_000_000;
        let mc = (0..n).map(|_| { let u: f64 = dist.sample(&mut rng); u * u * u }).sum::<f64>() / n as f64;
        let exact = w.raw_moment(3.0);
        assert!(((mc - exact) / exact).abs() < 5e-3, "{mc} vs {exact}");
    }

    #[test]
    fn zero_cp_gives_zero_and_energy_is_linear() {
        let w = WeibullParams::new(2.0, 8.0).unwrap();
        let s = EnergySetup { wind_range: (4.0, 16.0), ..setup() };
        assert_eq!(expected_energy(|_| 0.0, &w, &s).unwrap(), 0.0);
        let mu = |u: f64| 0.45 - 0.002 * (u - 9.0).powi(2);
        let one = expected_energy(mu, &w, &s).unwrap();
        let two = expected_energy(|u| 2.0 * mu(u), &w, &s).unwrap();
        assert_eq!(two, 2.0 * one);
    }

    #[test]
    fn power_cap_limits_energy() {
        let w = WeibullParams::new(2.0, 9.0).unwrap();
        let s = EnergySetup { wind_range: (4.0, 16.0), ..setup() };
        let free = expected_energy(|_| 0.45, &w, &s).unwrap();
        let capped = expected_energy(|_| 0.45, &w, &EnergySetup { power_cap: Some(2.3e6), ..s }).unwrap();
        assert!(capped < free);
        let hours = s.period / 3600.0 * (w.cdf(16.0) - w.cdf(4.0));
        assert!(capped <= 2.3e6 * hours * (1.0 + 1e-6));
    }

    #[test]
    fn constant_sigma_weights_probability_mass() {
        let w = WeibullParams::new(1.195, 4.837).unwrap();
        let r = expected_sigma_of(|_| 0.03, &w, (4.0, 16.0)).unwrap();
        assert!((r - 0.03 * (w.cdf(16.0) - w.cdf(4.0))).abs() < 1e-10);
    }

    #[test]
    fn sigma_near_zero_for_dense_noiseless_gp() {
        let pts: Vec<(f64, f64)> = (0..61).map(|i| { let u = 4.0 + 0.2 * i as f64; (u, 0.35 + 0.05 * (u / 4.0).cos()) }).collect();
        let gp = fit_gp(&pts).unwrap();
        let w = WeibullParams::new(2.0, 8.0).unwrap();
        assert!(expected_sigma(&gp, &w, (4.0, 16.0)).unwrap() < 1e-3);
    }

    fn sample(u: f64, cp: f64) -> EpcSample {
        EpcSample { wind_speed: u, cp, power: 1e6 * cp, rotor_speed: 10.0, pitch: 2.0, oaspl: Some(44.0) }
    }

    #[test]
    fn epc_bins_and_statistics() {
        let s = [sample(4.2, 0.3), sample(4.7, 0.4), sample(6.1, 0.35), sample(16.0, 0.2), sample(3.0, 0.9)];
        let t = build_epc(&s, 1.0, (4.0, 16.0)).unwrap();
        assert_eq!(t.bins.len(), 12);
        assert_eq!(t.bins[0].count, 2);
        let cp = t.bins[0].cp.unwrap();
        assert!((cp.mean - 0.35).abs() < 1e-15 && (cp.std - 0.05).abs() < 1e-15);
        assert_eq!(t.bins[2].cp.unwrap().std, 0.0);
        assert!(t.bins[1].is_empty() && t.bins[1].cp.is_none());
        assert_eq!(t.bins[11].count, 1);
        assert_eq!(t.bins.iter().map(|b| b.count).sum::<usize>(), 4);
    }

    #[test]
    fn constant_cp_trajectory_gives_constant_means() {
        let s: Vec<EpcSample> = (0..200).map(|i| sample(4.0 + 0.06 * i as f64, 0.33)).collect();
        let t = build_epc(&s, 0.5, (4.0, 16.0)).unwrap();
        assert!(t.bins.iter().filter(|b| !b.is_empty()).all(|b| (b.cp.unwrap().mean - 0.33).abs() < 1e-15));
        assert!(build_epc(&[], 0.5, (4.0, 16.0)).is_err());
    }
}
