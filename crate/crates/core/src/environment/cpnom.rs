//! Nominal (maximum admissible) power coefficient by grid scan.

use super::{EnvState, Plant, StateBounds};

/// Points per axis of the (U, Ω, θ) scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub wind: usize,
    pub rotor: usize,
    pub pitch: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { wind: 25, rotor: 25, pitch: 13 }
    }
}

/// Best admissible operating point found by the scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpNominal {
    pub cp_nom: f64,
    pub wind_speed: f64,
    pub rotor_speed: f64,
    pub pitch: f64,
    pub tsr: f64,
    /// Admissible grid points evaluated.
    pub evaluated: usize,
}

pub(crate) fn linspace((lo, hi): (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
}

/// Maximum Cp over the admissible grid points of the state space.
/// Ties keep the first point in (U, Ω, θ) scan order.
pub fn scan_cp_nominal(plant: &Plant, bounds: &StateBounds, grid: GridSpec) -> CpNominal {
    let r = plant.blade_radius();
    let mut best: Option<CpNominal> = None;
    let mut evaluated = 0;
    for u in linspace(bounds.wind, grid.wind) {
        for rpm in linspace(bounds.rotor, grid.rotor) {
            let s = EnvState::new(u, rpm, 0.0);
            if bounds.tsr_excess(&s, r) > 0.0 {
                continue;
            }
            for pitch in linspace(bounds.pitch, grid.pitch) {
                let cp = plant.performance(u, rpm, pitch).cp;
                evaluated += 1;
                if best.is_none_or(|b| cp > b.cp_nom) {
                    best = Some(CpNominal {
                        cp_nom: cp,
                        wind_speed: u,
                        rotor_speed: rpm,
                        pitch,
                        tsr: s.tip_speed_ratio(r),
                        evaluated: 0,
                    });
                }
            }
        }
    }
    let best = best.expect("the admissible region is never empty");
    CpNominal { evaluated, ..best }
}
