//! Rotor aerodynamics: geometry, airfoil polars and the BEM solver.

mod bem;
mod geometry;
mod polar;

pub use bem::{rotor_performance, solve_segment, BemDiagnostics, BemOptions, RotorPerformance, SegmentFlowState};
pub use geometry::{rad_s_to_rpm, rpm_to_rad_s, BladeSegment, TurbineGeometry};
pub use polar::AirfoilPolar;

/// Betz limit on the power coefficient.
pub const BETZ_LIMIT: f64 = 16.0 / 27.0;

#[derive(Debug, thiserror::Error)]
pub enum TurbineError {
    #[error("angle of attack {alpha}° outside polar table [{lo}, {hi}]")]
    OutOfRange { alpha: f64, lo: f64, hi: f64 },
    #[error("BEM iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { residual: f64, iterations: usize },
    #[error("invalid polar '{id}': {reason}")]
    InvalidPolar { id: String, reason: String },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("unknown airfoil '{0}'")]
    UnknownAirfoil(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
