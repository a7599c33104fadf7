//! Rotor geometry and its plain-text file format.
//!
//! A geometry file holds `key = value` header lines followed by a segment
//! table:
//!
//! ```text
//! blade_radius_m = 46.5
//! hub_radius_m = 2.0
//! n_blades = 3
//! rated_power_w = 2.3e6
//! rated_rpm = 14
//! station_m,width_m,chord_m,twist_deg,airfoil_id
//! 3.1125,2.225,3.40,13.2,generic
//! ...
//! ```
//!
//! Each `airfoil_id` resolves to `<polar_dir>/<airfoil_id>.polar`.

use std::f64::consts::PI;
use std::path::Path;

use super::{AirfoilPolar, TurbineError};

#[derive(Debug, Clone, PartialEq)]
pub struct BladeSegment {
    pub radial_station: f64,
    pub span_width: f64,
    pub chord: f64,
    /// Structural twist, degrees. Pitch is added on top of this.
    pub twist: f64,
    pub airfoil_id: String,
    /// Index into [`TurbineGeometry::polars`].
    pub airfoil: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TurbineGeometry {
    pub blade_radius: f64,
    pub hub_radius: f64,
    pub n_blades: usize,
    pub rated_power: f64,
    /// Rotor speed held above the end of Region II, rpm.
    pub rated_rpm: f64,
    pub segments: Vec<BladeSegment>,
    pub polars: Vec<AirfoilPolar>,
}

const BUNDLED_GEOMETRY: &str = include_str!("../../data/swt93_generic.geom");
const BUNDLED_POLAR: &str = include_str!("../../data/polars/generic.polar");

impl TurbineGeometry {
    pub fn new(
        blade_radius: f64,
        hub_radius: f64,
        n_blades: usize,
        rated_power: f64,
        rated_rpm: f64,
        segments: Vec<BladeSegment>,
        polars: Vec<AirfoilPolar>,
    ) -> Result<Self, TurbineError> {
        let invalid = |reason: String| Err(TurbineError::InvalidGeometry(reason));
        if !(blade_radius > 0.0 && hub_radius >= 0.0 && hub_radius < blade_radius) {
            return invalid(format!("need 0 <= hub_radius ({hub_radius}) < blade_radius ({blade_radius})"));
        }
        if n_blades == 0 {
            return invalid("n_blades must be positive".into());
        }
        if segments.is_empty() {
            return invalid("no blade segments".into());
        }
        if !(rated_power > 0.0) || !(rated_rpm > 0.0) {
            return invalid("rated_power and rated_rpm must be positive".into());
        }
        for w in segments.windows(2) {
            if w[1].radial_station <= w[0].radial_station {
                return invalid(format!(
                    "segments must be ordered by increasing station ({} then {})",
                    w[0].radial_station, w[1].radial_station
                ));
            }
        }
        for s in &segments {
            if !(s.radial_station > hub_radius && s.radial_station < blade_radius) {
                return invalid(format!("station {} outside ({hub_radius}, {blade_radius})", s.radial_station));
            }
            if !(s.chord > 0.0) || s.span_width < 0.0 {
                return invalid(format!("segment at {} has non-positive chord or negative width", s.radial_station));
            }
            if s.airfoil >= polars.len() || polars[s.airfoil].id != s.airfoil_id {
                return invalid(format!("segment at {} references unknown airfoil '{}'", s.radial_station, s.airfoil_id));
            }
        }
        let span: f64 = segments.iter().map(|s| s.span_width).sum();
        let expected = blade_radius - hub_radius;
        if ((span - expected) / expected).abs() > 1e-9 {
            return invalid(format!("span widths sum to {span} but blade_radius - hub_radius = {expected}"));
        }
        Ok(Self { blade_radius, hub_radius, n_blades, rated_power, rated_rpm, segments, polars })
    }

    pub fn rotor_area(&self) -> f64 {
        PI * self.blade_radius * self.blade_radius
    }

    pub fn polar(&self, segment: &BladeSegment) -> &AirfoilPolar {
        &self.polars[segment.airfoil]
    }

    /// Index of the outermost segment (the only one that sheds a tip vortex).
    pub fn tip_segment(&self) -> usize {
        self.segments.len() - 1
    }

    /// Tip-speed ratio for a rotor speed in rpm.
    pub fn tip_speed_ratio(&self, wind_speed: f64, rotor_rpm: f64) -> f64 {
        rpm_to_rad_s(rotor_rpm) * self.blade_radius / wind_speed
    }

    /// The in-repo 46.5 m three-bladed rotor with its synthetic polar.
    pub fn bundled() -> Self {
        let polar = AirfoilPolar::parse("generic", BUNDLED_POLAR).expect("bundled polar is valid");
        Self::parse(BUNDLED_GEOMETRY, |id| {
            if id == "generic" {
                Ok(polar.clone())
            } else {
                Err(TurbineError::UnknownAirfoil(id.to_string()))
            }
        })
        .expect("bundled geometry is valid")
    }

    /// Loads a geometry file, resolving airfoils in `polar_dir`.
    pub fn load(path: &Path, polar_dir: &Path) -> Result<Self, TurbineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TurbineError::Io { path: path.display().to_string(), source: e })?;
        Self::parse(&text, |id| AirfoilPolar::load(id, &polar_dir.join(format!("{id}.polar"))))
    }

    /// Parses geometry text; `resolve` supplies the polar for each airfoil id.
    pub fn parse(
        text: &str,
        mut resolve: impl FnMut(&str) -> Result<AirfoilPolar, TurbineError>,
    ) -> Result<Self, TurbineError> {
        let mut blade_radius = None;
        let mut hub_radius = None;
        let mut n_blades = None;
        let mut rated_power = None;
        let mut rated_rpm = None;
        let mut segments = Vec::new();
        let mut polars: Vec<AirfoilPolar> = Vec::new();

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let parse_err = |reason: String| TurbineError::Parse { line: lineno + 1, reason };
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some((key, value)) = line.split_once('=') {
                let value: f64 = value
                    .trim()
                    .parse()
                    .map_err(|e| parse_err(format!("value for '{}': {e}", key.trim())))?;
                match key.trim() {
                    "blade_radius_m" => blade_radius = Some(value),
                    "hub_radius_m" => hub_radius = Some(value),
                    "n_blades" => n_blades = Some(value as usize),
                    "rated_power_w" => rated_power = Some(value),
                    "rated_rpm" => rated_rpm = Some(value),
                    other => return Err(parse_err(format!("unknown key '{other}'"))),
                }
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields[0] == "station_m" {
                continue;
            }
            if fields.len() != 5 {
                return Err(parse_err(format!("expected 5 columns, found {}", fields.len())));
            }
            let num = |i: usize| -> Result<f64, TurbineError> {
                fields[i].parse().map_err(|e| parse_err(format!("column {}: {e}", i + 1)))
            };
            let airfoil_id = fields[4].to_string();
            let airfoil = match polars.iter().position(|p| p.id == airfoil_id) {
                Some(i) => i,
                None => {
                    polars.push(resolve(&airfoil_id)?);
                    polars.len() - 1
                }
            };
            segments.push(BladeSegment {
                radial_station: num(0)?,
                span_width: num(1)?,
                chord: num(2)?,
                twist: num(3)?,
                airfoil_id,
                airfoil,
            });
        }
        let missing = |k: &str| TurbineError::InvalidGeometry(format!("missing header key '{k}'"));
        Self::new(
            blade_radius.ok_or_else(|| missing("blade_radius_m"))?,
            hub_radius.ok_or_else(|| missing("hub_radius_m"))?,
            n_blades.ok_or_else(|| missing("n_blades"))?,
            rated_power.ok_or_else(|| missing("rated_power_w"))?,
            rated_rpm.ok_or_else(|| missing("rated_rpm"))?,
            segments,
            polars,
        )
    }
}

pub fn rpm_to_rad_s(rpm: f64) -> f64 {
    rpm * 2.0 * PI / 60.0
}

pub fn rad_s_to_rpm(omega: f64) -> f64 {
    omega * 60.0 / (2.0 * PI)
}
