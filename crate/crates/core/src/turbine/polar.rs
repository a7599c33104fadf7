//! Airfoil polar tables and their interpolation.

use std::path::Path;

use super::TurbineError;

/// Lift/drag polar for one airfoil family, tabulated against angle of attack.
///
/// `dstar_over_chord`, when present, is the suction-side boundary-layer
/// displacement thickness over chord at each tabulated angle. The acoustics
/// module falls back to a flat-plate estimate when it is absent.
#[derive(Debug, Clone, PartialEq)]
pub struct AirfoilPolar {
    pub id: String,
    angles: Vec<f64>,
    cl: Vec<f64>,
    cd: Vec<f64>,
    dstar_over_chord: Option<Vec<f64>>,
}

impl AirfoilPolar {
    /// Minimum angular coverage a usable polar must provide, degrees.
    pub const REQUIRED_RANGE: (f64, f64) = (-20.0, 25.0);

    pub fn new(
        id: impl Into<String>,
        angles: Vec<f64>,
        cl: Vec<f64>,
        cd: Vec<f64>,
        dstar_over_chord: Option<Vec<f64>>,
    ) -> Result<Self, TurbineError> {
        let id = id.into();
        let n = angles.len();
        if n < 2 || cl.len() != n || cd.len() != n {
            return Err(TurbineError::InvalidPolar {
                id,
                reason: format!(
                    "column lengths differ or too short (alpha {}, cl {}, cd {})",
                    n,
                    cl.len(),
                    cd.len()
                ),
            });
        }
        if let Some(d) = &dstar_over_chord {
            if d.len() != n {
                return Err(TurbineError::InvalidPolar {
                    id,
                    reason: "dstar_over_chord column length differs from alpha".into(),
                });
            }
        }
        if angles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(TurbineError::InvalidPolar {
                id,
                reason: "angles must be strictly increasing".into(),
            });
        }
        let (lo, hi) = Self::REQUIRED_RANGE;
        if angles[0] > lo || angles[n - 1] < hi {
            return Err(TurbineError::InvalidPolar {
                id,
                reason: format!(
                    "angles cover [{}, {}] but at least [{lo}, {hi}] is required",
                    angles[0],
                    angles[n - 1]
                ),
            });
        }
        if cd.iter().any(|&v| v < 0.0 || !v.is_finite()) || cl.iter().any(|v| !v.is_finite()) {
            return Err(TurbineError::InvalidPolar {
                id,
                reason: "coefficients must be finite and cd >= 0".into(),
            });
        }
        Ok(Self { id, angles, cl, cd, dstar_over_chord })
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn range(&self) -> (f64, f64) {
        (self.angles[0], self.angles[self.angles.len() - 1])
    }

    pub fn has_boundary_layer_table(&self) -> bool {
        self.dstar_over_chord.is_some()
    }

    /// Piecewise-linear `(cl, cd)` at `alpha` degrees.
    pub fn interpolate(&self, alpha: f64) -> Result<(f64, f64), TurbineError> {
        let (i, t) = self.locate(alpha)?;
        Ok((lerp(self.cl[i], self.cl[i + 1], t), lerp(self.cd[i], self.cd[i + 1], t)))
    }

    /// Suction-side displacement thickness over chord, if tabulated.
    pub fn dstar_over_chord(&self, alpha: f64) -> Option<f64> {
        let table = self.dstar_over_chord.as_ref()?;
        let a = alpha.clamp(self.angles[0], self.angles[self.angles.len() - 1]);
        let (i, t) = self.locate(a).ok()?;
        Some(lerp(table[i], table[i + 1], t))
    }

    fn locate(&self, alpha: f64) -> Result<(usize, f64), TurbineError> {
        let (lo, hi) = self.range();
        if !(alpha >= lo && alpha <= hi) {
            return Err(TurbineError::OutOfRange { alpha, lo, hi });
        }
        // index of the first node strictly greater than alpha, minus one
        let upper = self.angles.partition_point(|&a| a <= alpha);
        let i = upper.saturating_sub(1).min(self.angles.len() - 2);
        let t = (alpha - self.angles[i]) / (self.angles[i + 1] - self.angles[i]);
        Ok((i, t))
    }

    /// Reads a whitespace- or comma-separated table with columns
    /// `alpha_deg cl cd [dstar_over_chord]`. Lines starting with `#` and a
    /// non-numeric header line are skipped.
    pub fn parse(id: &str, text: &str) -> Result<Self, TurbineError> {
        let mut angles = Vec::new();
        let mut cl = Vec::new();
        let mut cd = Vec::new();
        let mut dstar = Vec::new();
        let mut columns = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> =
                line.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).collect();
            if fields[0].parse::<f64>().is_err() {
                // header row
                continue;
            }
            let values = fields
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| TurbineError::Parse { line: lineno + 1, reason: e.to_string() })?;
            let ncol = *columns.get_or_insert(values.len());
            if values.len() != ncol || !(3..=4).contains(&ncol) {
                return Err(TurbineError::Parse {
                    line: lineno + 1,
                    reason: format!("expected 3 or 4 columns consistently, found {}", values.len()),
                });
            }
            angles.push(values[0]);
            cl.push(values[1]);
            cd.push(values[2]);
            if ncol == 4 {
                dstar.push(values[3]);
            }
        }
        let dstar = (!dstar.is_empty()).then_some(dstar);
        Self::new(id, angles, cl, cd, dstar)
    }

    pub fn load(id: &str, path: &Path) -> Result<Self, TurbineError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| TurbineError::Io { path: path.display().to_string(), source: e })?;
        Self::parse(id, &text)
    }
}

#[inline]
fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table() -> AirfoilPolar {
        AirfoilPolar::new(
            "t",
            vec![-20.0, 0.0, 10.0, 25.0],
            vec![-1.0, 0.2, 1.2, 0.9],
            vec![0.2, 0.01, 0.03, 0.4],
            None,
        )
        .unwrap()
    }

    #[test]
    fn exact_at_nodes() {
        let p = table();
        assert_eq!(p.interpolate(10.0).unwrap(), (1.2, 0.03));
        assert_eq!(p.interpolate(-20.0).unwrap(), (-1.0, 0.2));
        assert_eq!(p.interpolate(25.0).unwrap(), (0.9, 0.4));
    }

    #[test]
    fn midpoint_is_mean() {
        let p = table();
        let (cl, cd) = p.interpolate(5.0).unwrap();
        assert!((cl - 0.7).abs() < 1e-15);
        assert!((cd - 0.02).abs() < 1e-15);
    }

    #[test]
    fn outside_table_is_out_of_range() {
        let p = table();
        assert!(matches!(p.interpolate(26.0), Err(TurbineError::OutOfRange { .. })));
        assert!(matches!(p.interpolate(f64::NAN), Err(TurbineError::OutOfRange { .. })));
    }

    #[test]
    fn rejects_bad_tables() {
        let short = AirfoilPolar::new("x", vec![-10.0, 25.0], vec![0.0; 2], vec![0.0; 2], None);
        assert!(short.is_err());
        let neg_cd =
            AirfoilPolar::new("x", vec![-20.0, 25.0], vec![0.0; 2], vec![0.0, -0.1], None);
        assert!(neg_cd.is_err());
        let unsorted = AirfoilPolar::new(
            "x",
            vec![-20.0, 5.0, 5.0, 25.0],
            vec![0.0; 4],
            vec![0.0; 4],
            None,
        );
        assert!(unsorted.is_err());
    }

    #[test]
    fn parses_with_header_and_comments() {
        let text = "# synthetic\nalpha_deg,cl,cd,dstar_over_chord\n-20,-1,0.2,0.01\n0, 0.2, 0.01, 0.002\n25 0.9 0.4 0.05\n";
        let p = AirfoilPolar::parse("p", text).unwrap();
        assert!(p.has_boundary_layer_table());
        assert!((p.dstar_over_chord(0.0).unwrap() - 0.002).abs() < 1e-15);
        assert_eq!(p.range(), (-20.0, 25.0));
    }
}
