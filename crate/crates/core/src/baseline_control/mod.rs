//! Region-based variable-speed controller: tip-speed-ratio tracking below
//! rated speed, a constant-speed band, and PI pitch regulation of rated power.

mod pid;

pub use pid::{Pid, PidGains};

use crate::environment::{CpNominal, Plant, StateBounds};
use crate::turbine::{rad_s_to_rpm, rpm_to_rad_s};

/// Operating regions in order of increasing wind speed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    /// Below cut-in: parked.
    I,
    /// Optimal tip-speed-ratio tracking.
    II,
    /// Constant rotor speed, pitch for maximum power.
    IIHalf,
    /// Rated power held by pitch.
    III,
    /// Above cut-off: shut down.
    IV,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::I => "I",
            Region::II => "II",
            Region::IIHalf => "II.5",
            Region::III => "III",
            Region::IV => "IV",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlRegions {
    /// m/s
    pub cut_in: f64,
    /// m/s
    pub rated_wind: f64,
    /// m/s
    pub cut_off: f64,
    /// rpm
    pub rated_rpm: f64,
    pub lambda_opt: f64,
    /// deg
    pub theta_opt: f64,
    /// W
    pub rated_power: f64,
    /// m
    pub blade_radius: f64,
    /// deg
    pub pitch_bounds: (f64, f64),
    /// rpm
    pub rotor_bounds: (f64, f64),
    /// `(wind m/s, pitch deg)` maximising power at rated speed, ascending in wind.
    pub max_power_pitch: Vec<(f64, f64)>,
}

impl ControlRegions {
    /// Wind speed at which λ_opt tracking reaches rated speed, capped at rated wind.
    pub fn tracking_limit(&self) -> f64 {
        (rpm_to_rad_s(self.rated_rpm) * self.blade_radius / self.lambda_opt).min(self.rated_wind)
    }

    /// rpm for λ_opt at `wind_speed`.
    pub fn tracking_speed(&self, wind_speed: f64) -> f64 {
        rad_s_to_rpm(self.lambda_opt * wind_speed / self.blade_radius)
    }

    /// Pitch maximising power at rated speed, linearly interpolated.
    pub fn pitch_for_max_power(&self, wind_speed: f64) -> f64 {
        let t = &self.max_power_pitch;
        match t.iter().position(|&(u, _)| u >= wind_speed) {
            None => t.last().map_or(self.theta_opt, |p| p.1),
            Some(0) => t[0].1,
            Some(i) => {
                let ((u0, p0), (u1, p1)) = (t[i - 1], t[i]);
                p0 + (p1 - p0) * (wind_speed - u0) / (u1 - u0)
            }
        }
    }
}

/// Intervals are half-open `[lower, upper)` except that Region III includes
/// the cut-off speed itself.
pub fn classify_region(wind_speed: f64, regions: &ControlRegions) -> Region {
    if wind_speed < regions.cut_in {
        Region::I
    } else if wind_speed > regions.cut_off {
        Region::IV
    } else if wind_speed >= regions.rated_wind {
        Region::III
    } else if wind_speed >= regions.tracking_limit() {
        Region::IIHalf
    } else {
        Region::II
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlCommand {
    /// rpm
    pub rotor_speed: f64,
    /// deg
    pub pitch: f64,
    pub region: Region,
    pub shutdown: bool,
}

/// One controller decision from the observed wind and the power measured at
/// the current setpoint. The PID is engaged on entry to Region III.
pub fn control_step(
    wind_speed: f64,
    current: (f64, f64),
    measured_power: f64,
    regions: &ControlRegions,
    pid: &mut Pid,
    previous_region: Option<Region>,
    dt: f64,
) -> ControlCommand {
    assert!(dt > 0.0, "control interval must be positive");
    let region = classify_region(wind_speed, regions);
    let (rotor_speed, pitch) = match region {
        Region::I | Region::IV => (regions.rotor_bounds.0, regions.pitch_bounds.1),
        Region::II => (regions.tracking_speed(wind_speed), regions.theta_opt),
        Region::IIHalf => (regions.rated_rpm, regions.pitch_for_max_power(wind_speed)),
        Region::III => {
            if previous_region != Some(Region::III) {
                pid.engage(current.1);
            }
            let error = (regions.rated_power - measured_power) / regions.rated_power;
            let limits = (regions.pitch_bounds.0, regions.pitch_for_max_power(wind_speed));
            (regions.rated_rpm, pid.update(error, dt, limits))
        }
    };
    ControlCommand {
        rotor_speed: rotor_speed.clamp(regions.rotor_bounds.0, regions.rotor_bounds.1),
        pitch: pitch.clamp(regions.pitch_bounds.0, regions.pitch_bounds.1),
        region,
        shutdown: matches!(region, Region::I | Region::IV),
    }
}

/// Stateful wrapper that remembers the last region and setpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicController {
    pub regions: ControlRegions,
    pub pid: Pid,
    pub last_region: Option<Region>,
}

impl ClassicController {
    pub fn new(regions: ControlRegions, gains: PidGains) -> Self {
        Self { regions, pid: Pid::new(gains), last_region: None }
    }

    pub fn command(&mut self, wind_speed: f64, current: (f64, f64), measured_power: f64, dt: f64) -> ControlCommand {
        let cmd = control_step(wind_speed, current, measured_power, &self.regions, &mut self.pid, self.last_region, dt);
        self.last_region = Some(cmd.region);
        cmd
    }

    pub fn reset(&mut self) {
        self.pid = Pid::new(self.pid.gains);
        self.last_region = None;
    }
}

const PITCH_GRID_DEG: f64 = 0.25;
const TABLE_STEP: f64 = 0.25;

/// Pitch maximising power at `(wind_speed, rpm)`: grid scan then golden section.
fn best_pitch(plant: &Plant, wind_speed: f64, rpm: f64, (lo, hi): (f64, f64)) -> (f64, f64) {
    let power = |th: f64| plant.performance(wind_speed, rpm, th).power;
    let n = ((hi - lo) / PITCH_GRID_DEG).round() as usize;
    let (mut best_th, mut best_p) = (lo, f64::NEG_INFINITY);
    for i in 0..=n {
        let th = (lo + i as f64 * PITCH_GRID_DEG).min(hi);
        let p = power(th);
        if p > best_p {
            (best_th, best_p) = (th, p);
        }
    }
    let (mut a, mut b) = ((best_th - PITCH_GRID_DEG).max(lo), (best_th + PITCH_GRID_DEG).min(hi));
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..40 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if power(c) >= power(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let th = 0.5 * (a + b);
    let p = power(th);
    if p >= best_p { (th, p) } else { (best_th, best_p) }
}

/// Region boundaries from the model. λ_opt and θ_opt come from the nominal
/// scan; the rated wind is the smallest speed whose scheduled power, with
/// pitch chosen for maximum power, reaches rated power (the cut-off speed if
/// it never does).
pub fn tune_region_boundaries(plant: &Plant, nominal: &CpNominal, bounds: &StateBounds, cut_in: f64, cut_off: f64) -> ControlRegions {
    let g = &plant.geometry;
    let mut regions = ControlRegions {
        cut_in,
        rated_wind: cut_off,
        cut_off,
        rated_rpm: g.rated_rpm,
        lambda_opt: nominal.tsr,
        theta_opt: nominal.pitch,
        rated_power: g.rated_power,
        blade_radius: g.blade_radius,
        pitch_bounds: bounds.pitch,
        rotor_bounds: bounds.rotor,
        max_power_pitch: Vec::new(),
    };
    let schedule_power = |r: &ControlRegions, u: f64| {
        let rpm = r.tracking_speed(u).min(r.rated_rpm);
        best_pitch(plant, u, rpm, bounds.pitch).1
    };

    let start = regions.tracking_limit().min(cut_off);
    let n = ((cut_off - start) / TABLE_STEP).ceil() as usize;
    let winds: Vec<f64> = (0..=n).map(|i| (start + i as f64 * TABLE_STEP).min(cut_off)).collect();
    regions.max_power_pitch = winds.iter().map(|&u| (u, best_pitch(plant, u, g.rated_rpm, bounds.pitch).0)).collect();
    regions.max_power_pitch.dedup_by(|a, b| a.0 == b.0);

    if g.rated_power.is_finite() {
        let coarse = std::iter::successors(Some(cut_in), |u| Some(u + TABLE_STEP)).take_while(|&u| u <= cut_off);
        if let Some(hit) = coarse.into_iter().find(|&u| schedule_power(&regions, u) >= g.rated_power) {
            let (mut lo, mut hi) = ((hit - TABLE_STEP).max(cut_in), hit);
            if hit > cut_in {
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    if schedule_power(&regions, mid) >= g.rated_power {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
            }
            regions.rated_wind = hi;
        }
    }
    regions
}

/// Sign of d(power)/d(pitch) just below the max-power pitch at rated speed
/// and the given wind.
pub fn pitch_sensitivity_sign(plant: &Plant, regions: &ControlRegions, wind_speed: f64) -> f64 {
    let peak = regions.pitch_for_max_power(wind_speed);
    let p = |th: f64| plant.performance(wind_speed, regions.rated_rpm, th).power;
    if p(peak) - p(peak - 1.0) >= 0.0 { 1.0 } else { -1.0 }
}

/// Powers from `steps` control intervals at constant wind, starting from the
/// max-power setpoint. Each command is evaluated one interval after the
/// measurement it used.
pub fn closed_loop_powers(plant: &Plant, ctrl: &mut ClassicController, wind_speed: f64, steps: usize, dt: f64) -> Vec<f64> {
    ctrl.reset();
    let mut setpoint = (ctrl.regions.rated_rpm, ctrl.regions.pitch_for_max_power(wind_speed));
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let measured = plant.performance(wind_speed, setpoint.0, setpoint.1).power;
        let cmd = ctrl.command(wind_speed, setpoint, measured, dt);
        setpoint = (cmd.rotor_speed, cmd.pitch);
        out.push(if cmd.shutdown { 0.0 } else { plant.performance(wind_speed, setpoint.0, setpoint.1).power });
    }
    out
}

fn settles(powers: &[f64], rated: f64, tol: f64) -> bool {
    powers.len() >= 20 && powers[powers.len() - 20..].iter().all(|p| ((p - rated) / rated).abs() <= tol)
}

/// Winds used to tune and check the Region III loop.
pub fn region_iii_test_winds(regions: &ControlRegions) -> Vec<f64> {
    if regions.rated_wind >= regions.cut_off {
        return Vec::new();
    }
    let lo = regions.rated_wind + 0.25;
    (0..5).map(|i| lo + (regions.cut_off - lo) * i as f64 / 4.0).collect()
}

/// Ziegler–Nichols-style gain search: with `kp = ki·dt = κ`, κ is doubled
/// until some Region III test wind no longer settles to within 0.5 % of
/// rated power in 200 intervals; the result is half the last settling κ.
/// Derivative gain stays zero.
pub fn tune_pid(plant: &Plant, regions: &ControlRegions, dt: f64) -> PidGains {
    let winds = region_iii_test_winds(regions);
    let mid = winds.get(winds.len() / 2).copied().unwrap_or(regions.cut_off);
    let direction = pitch_sensitivity_sign(plant, regions, mid);
    let gains = |k: f64| PidGains { kp: k, ki: k / dt, kd: 0.0, direction };
    let stable = |k: f64| {
        let mut ctrl = ClassicController::new(regions.clone(), gains(k));
        winds.iter().all(|&u| settles(&closed_loop_powers(plant, &mut ctrl, u, 200, dt), regions.rated_power, 0.005))
    };
    let mut k = 1.0;
    let mut last_good = None;
    while k < 1e4 {
        if stable(k) {
            last_good = Some(k);
        } else if last_good.is_some() {
            break;
        }
        k *= 2.0;
    }
    gains(0.5 * last_good.unwrap_or(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{scan_cp_nominal, GridSpec};
    use std::sync::OnceLock;

    fn tuned() -> &'static (Plant, ControlRegions, PidGains) {
        static CELL: OnceLock<(Plant, ControlRegions, PidGains)> = OnceLock::new();
        CELL.get_or_init(|| {
            let plant = Plant::bundled();
            let bounds = StateBounds::default();
            let nom = scan_cp_nominal(&plant, &bounds, GridSpec::default());
            let regions = tune_region_boundaries(&plant, &nom, &bounds, 4.0, 16.0);
            let gains = tune_pid(&plant, &regions, 60.0);
            (plant, regions, gains)
        })
    }

    fn simple_regions() -> ControlRegions {
        ControlRegions {
            cut_in: 4.0,
            rated_wind: 12.0,
            cut_off: 16.0,
            rated_rpm: 16.0,
            lambda_opt: 8.0,
            theta_opt: 0.0,
            rated_power: 2.3e6,
            blade_radius: 46.5,
            pitch_bounds: (-5.0, 10.0),
            rotor_bounds: (6.0, 18.0),
            max_power_pitch: vec![(9.0, 1.0), (16.0, 8.0)],
        }
    }

    #[test]
    fn tracking_command_matches_unit_conversion() {
        let r = simple_regions();
        let mut pid = Pid::new(PidGains { kp: 1.0, ki: 0.0, kd: 0.0, direction: 1.0 });
        let cmd = control_step(8.0, (10.0, 0.0), 0.0, &r, &mut pid, None, 60.0);
        let expected = (64.0 / 46.5) * 60.0 / (2.0 * std::f64::consts::PI);
        assert_eq!(cmd.region, Region::II);
        assert!((cmd.rotor_speed - expected).abs() < 1e-12);
        assert!((cmd.rotor_speed - 13.14).abs() < 0.005);
        let tsr = rpm_to_rad_s(cmd.rotor_speed) * 46.5 / 8.0;
        assert!((tsr - 8.0).abs() < 1e-6);
    }

    #[test]
    fn region_boundaries_are_half_open() {
        let r = simple_regions();
        assert_eq!(classify_region(2.0, &r), Region::I);
        assert_eq!(classify_region(4.0, &r), Region::II);
        assert_eq!(classify_region(r.tracking_limit(), &r), Region::IIHalf);
        assert_eq!(classify_region(12.0, &r), Region::III);
        assert_eq!(classify_region(16.0, &r), Region::III);
        assert_eq!(classify_region(16.1, &r), Region::IV);
    }

    #[test]
    fn shutdown_outside_operating_range() {
        let r = simple_regions();
        let mut pid = Pid::new(PidGains { kp: 1.0, ki: 0.0, kd: 0.0, direction: 1.0 });
        for u in [2.0, 16.1] {
            let cmd = control_step(u, (12.0, 0.0), 1e6, &r, &mut pid, None, 60.0);
            assert!(cmd.shutdown);
            assert_eq!(cmd.rotor_speed, 6.0);
        }
    }

    #[test]
    fn pitch_table_interpolates() {
        let r = simple_regions();
        assert_eq!(r.pitch_for_max_power(5.0), 1.0);
        assert!((r.pitch_for_max_power(12.5) - 4.5).abs() < 1e-12);
        assert_eq!(r.pitch_for_max_power(20.0), 8.0);
    }

    #[test]
    fn bundled_rated_wind_in_expected_band() {
        let (_, r, _) = tuned();
        assert!((11.0..=14.0).contains(&r.rated_wind), "{}", r.rated_wind);
        assert!(r.cut_in < r.tracking_limit() && r.tracking_limit() <= r.rated_wind && r.rated_wind < r.cut_off);
    }

    #[test]
    fn lambda_opt_is_cp_argmax_at_theta_opt() {
        let (plant, r, _) = tuned();
        let u = 9.5;
        let cp = |tsr: f64| plant.performance(u, rad_s_to_rpm(tsr * u / r.blade_radius), r.theta_opt).cp;
        let step = (18.0 - 6.0) / 24.0 * std::f64::consts::PI / 30.0 * r.blade_radius / u;
        assert!(cp(r.lambda_opt) >= cp(r.lambda_opt + step));
        assert!(cp(r.lambda_opt) >= cp(r.lambda_opt - step));
    }

    #[test]
    fn infinite_rated_power_removes_region_iii() {
        let mut plant = Plant::bundled();
        plant.geometry.rated_power = f64::INFINITY;
        let bounds = StateBounds::default();
        let nom = scan_cp_nominal(&plant, &bounds, GridSpec::default());
        let r = tune_region_boundaries(&plant, &nom, &bounds, 4.0, 16.0);
        assert_eq!(r.rated_wind, 16.0);
        assert!(region_iii_test_winds(&r).is_empty());
    }

    #[test]
    fn region_iii_holds_rated_power() {
        let (plant, r, gains) = tuned();
        assert!(gains.kp > 0.0 && gains.ki > 0.0);
        let mut ctrl = ClassicController::new(r.clone(), *gains);
        for u in region_iii_test_winds(r).into_iter().chain([r.rated_wind + 0.05]) {
            let p = closed_loop_powers(plant, &mut ctrl, u, 120, 60.0);
            let last = *p.last().unwrap();
            assert!(((last - r.rated_power) / r.rated_power).abs() < 0.02, "U = {u}: {last}");
        }
    }

    #[test]
    fn steady_power_curve_is_monotone_then_flat() {
        let (plant, r, gains) = tuned();
        let mut ctrl = ClassicController::new(r.clone(), *gains);
        let mut prev = 0.0;
        for i in 0..=48 {
            let u = 4.0 + 0.25 * i as f64;
            let p = match classify_region(u, r) {
                Region::III => *closed_loop_powers(plant, &mut ctrl, u, 120, 60.0).last().unwrap(),
                _ => {
                    ctrl.reset();
                    let cmd = ctrl.command(u, (r.rated_rpm, r.theta_opt), 0.0, 60.0);
                    plant.performance(u, cmd.rotor_speed, cmd.pitch).power
                }
            };
            if u < r.rated_wind {
                assert!(p >= prev - 1e-6 * r.rated_power, "U = {u}: {p} < {prev}");
                assert!(p < r.rated_power * 1.0001);
            } else {
                assert!(((p - r.rated_power) / r.rated_power).abs() < 0.02, "U = {u}: {p}");
            }
            prev = p;
        }
        assert_eq!(classify_region(2.0, r), Region::I);
    }
}
