//! Steady blade-element-momentum solver.
//!
//! Each annulus is solved independently by relaxed fixed-point iteration on
//! the axial and tangential induction factors, with Prandtl tip loss and the
//! Glauert (Buhl form) high-induction branch above `a = 0.4`.

use std::f64::consts::PI;

use super::geometry::{rpm_to_rad_s, BladeSegment, TurbineGeometry};
use super::TurbineError;

/// Induction above which the momentum relation is replaced by the empirical
/// Glauert thrust curve.
const GLAUERT_TRANSITION: f64 = 0.4;
const MAX_AXIAL_INDUCTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BemOptions {
    /// Air density, kg/m³.
    pub air_density: f64,
    pub relaxation: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub tip_loss: bool,
    pub glauert_correction: bool,
}

impl Default for BemOptions {
    fn default() -> Self {
        Self {
            air_density: 1.225,
            relaxation: 0.25,
            tolerance: 1e-8,
            max_iterations: 500,
            tip_loss: true,
            glauert_correction: true,
        }
    }
}

impl BemOptions {
    /// Same physics with a tolerance ten times tighter and a larger iteration
    /// budget; used as a convergence oracle.
    pub fn tight(&self) -> Self {
        Self { tolerance: self.tolerance / 10.0, max_iterations: self.max_iterations * 4, ..*self }
    }
}

/// Converged local flow at one blade segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentFlowState {
    pub axial_induction: f64,
    pub tangential_induction: f64,
    /// m/s
    pub relative_velocity: f64,
    /// degrees
    pub angle_of_attack: f64,
    /// degrees
    pub inflow_angle: f64,
    pub local_solidity: f64,
    pub cl: f64,
    pub cd: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BemDiagnostics {
    pub non_converged: usize,
    pub out_of_range: usize,
}

impl BemDiagnostics {
    pub fn failed_segments(&self) -> usize {
        self.non_converged + self.out_of_range
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RotorPerformance {
    pub cp: f64,
    /// W
    pub power: f64,
    /// N
    pub thrust: f64,
    /// N·m
    pub torque: f64,
    /// rad/s
    pub omega: f64,
    /// `None` where the segment did not converge or left the polar table;
    /// such segments carry zero force.
    pub per_segment: Vec<Option<SegmentFlowState>>,
    pub diagnostics: BemDiagnostics,
}

struct Iterate {
    phi: f64,
    alpha: f64,
    cl: f64,
    cd: f64,
    a_target: f64,
    ap_target: f64,
}

fn prandtl_tip_loss(n_blades: usize, tip_radius: f64, r: f64, phi: f64) -> f64 {
    let s = phi.sin().abs();
    if s < 1e-12 {
        return 1.0;
    }
    let f = n_blades as f64 * (tip_radius - r) / (2.0 * r * s);
    (2.0 / PI * (-f).exp().clamp(-1.0, 1.0).acos()).max(1e-4)
}

fn evaluate(
    geom: &TurbineGeometry,
    seg: &BladeSegment,
    wind_speed: f64,
    omega: f64,
    pitch: f64,
    a: f64,
    ap: f64,
    opts: &BemOptions,
) -> Result<Iterate, TurbineError> {
    let r = seg.radial_station;
    let sigma = geom.n_blades as f64 * seg.chord / (2.0 * PI * r);
    let phi = (wind_speed * (1.0 - a)).atan2(omega * r * (1.0 + ap));
    let alpha = phi.to_degrees() - seg.twist - pitch;
    let (cl, cd) = geom.polar(seg).interpolate(alpha)?;
    let (sphi, cphi) = phi.sin_cos();
    let cn = cl * cphi + cd * sphi;
    let ct = cl * sphi - cd * cphi;
    let f = if opts.tip_loss { prandtl_tip_loss(geom.n_blades, geom.blade_radius, r, phi) } else { 1.0 };

    let s2 = (sphi * sphi).max(1e-12);
    let k = sigma * cn / (4.0 * f * s2);
    let mut a_target = if (k + 1.0).abs() > 1e-12 { k / (1.0 + k) } else { MAX_AXIAL_INDUCTION };
    if opts.glauert_correction && a_target > GLAUERT_TRANSITION {
        // Buhl's continuous form of the Glauert correction, thrust from the current iterate.
        let ct_thrust = sigma * (1.0 - a).powi(2) * cn / s2;
        let disc = ct_thrust * (50.0 - 36.0 * f) + 12.0 * f * (3.0 * f - 4.0);
        if disc >= 0.0 {
            a_target = (18.0 * f - 20.0 - 3.0 * disc.sqrt()) / (36.0 * f - 50.0);
        }
    }
    let a_target = if a_target.is_finite() { a_target.clamp(0.0, MAX_AXIAL_INDUCTION) } else { MAX_AXIAL_INDUCTION };

    let denom = 4.0 * f * sphi * cphi;
    let kp = if denom.abs() > 1e-12 { sigma * ct / denom } else { 0.0 };
    let ap_target = if (1.0 - kp).abs() > 1e-12 { kp / (1.0 - kp) } else { 1.0 };
    let ap_target = if ap_target.is_finite() { ap_target.clamp(-0.5, 1.0) } else { 0.0 };

    Ok(Iterate { phi, alpha, cl, cd, a_target, ap_target })
}

/// Solves the momentum/blade-element balance on one segment.
///
/// `omega` is in rad/s and `pitch` in degrees.
pub fn solve_segment(
    geom: &TurbineGeometry,
    seg: &BladeSegment,
    wind_speed: f64,
    omega: f64,
    pitch: f64,
    opts: &BemOptions,
) -> Result<SegmentFlowState, TurbineError> {
    let mut a = 0.25;
    let mut ap = 0.0;
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iterations {
        let it = evaluate(geom, seg, wind_speed, omega, pitch, a, ap, opts)?;
        let da = it.a_target - a;
        let dap = it.ap_target - ap;
        residual = da.abs().max(dap.abs());
        if residual < opts.tolerance {
            let (a, ap) = (it.a_target, it.ap_target);
            let fin = evaluate(geom, seg, wind_speed, omega, pitch, a, ap, opts)?;
            let vx = wind_speed * (1.0 - a);
            let vt = omega * seg.radial_station * (1.0 + ap);
            return Ok(SegmentFlowState {
                axial_induction: a,
                tangential_induction: ap,
                relative_velocity: vx.hypot(vt),
                angle_of_attack: fin.alpha,
                inflow_angle: fin.phi.to_degrees(),
                local_solidity: geom.n_blades as f64 * seg.chord / (2.0 * PI * seg.radial_station),
                cl: fin.cl,
                cd: fin.cd,
                iterations: iter,
            });
        }
        a += opts.relaxation * da;
        ap += opts.relaxation * dap;
    }
    Err(TurbineError::NoConvergence { residual, iterations: opts.max_iterations })
}

/// Integrates segment loads into rotor power, thrust and power coefficient.
///
/// Failed segments (no convergence or outside the polar table) contribute
/// zero force and are counted in the diagnostics.
pub fn rotor_performance(
    geom: &TurbineGeometry,
    wind_speed: f64,
    rotor_rpm: f64,
    pitch: f64,
    opts: &BemOptions,
) -> RotorPerformance {
    let omega = rpm_to_rad_s(rotor_rpm);
    let mut diagnostics = BemDiagnostics::default();
    let mut thrust = 0.0;
    let mut torque = 0.0;
    let mut per_segment = Vec::with_capacity(geom.segments.len());
    for seg in &geom.segments {
        match solve_segment(geom, seg, wind_speed, omega, pitch, opts) {
            Ok(state) => {
                let (s, c) = state.inflow_angle.to_radians().sin_cos();
                let cn = state.cl * c + state.cd * s;
                let ct = state.cl * s - state.cd * c;
                let q = 0.5 * opts.air_density * state.relative_velocity.powi(2) * seg.chord * seg.span_width;
                let b = geom.n_blades as f64;
                thrust += b * q * cn;
                torque += b * q * ct * seg.radial_station;
                per_segment.push(Some(state));
            }
            Err(TurbineError::NoConvergence { residual, .. }) => {
                log::debug!("segment at r={} did not converge (residual {residual:e})", seg.radial_station);
                diagnostics.non_converged += 1;
                per_segment.push(None);
            }
            Err(e) => {
                log::debug!("segment at r={}: {e}", seg.radial_station);
                diagnostics.out_of_range += 1;
                per_segment.push(None);
            }
        }
    }
    let power = torque * omega;
    let cp = power / (0.5 * opts.air_density * geom.rotor_area() * wind_speed.powi(3));
    RotorPerformance { cp, power, thrust, torque, omega, per_segment, diagnostics }
}
