//! One-third-octave spectra and decibel algebra.

use std::fmt::Write as _;

use super::AcousticsError;

/// Number of one-third-octave bands between 10 Hz and 10 kHz.
pub const BAND_COUNT: usize = 31;

/// Level used for a band carrying no energy, dB.
pub const SILENCE_DB: f64 = -300.0;

/// Base-10 one-third-octave centre frequencies, 10 Hz to 10 kHz.
pub fn band_centers() -> [f64; BAND_COUNT] {
    std::array::from_fn(|i| 10f64.powf(1.0 + i as f64 / 10.0))
}

/// Converts a level to relative energy; silence maps to exactly zero.
#[inline]
pub fn db_to_energy(level: f64) -> f64 {
    if level <= SILENCE_DB {
        0.0
    } else {
        10f64.powf(level / 10.0)
    }
}

#[inline]
pub fn energy_to_db(energy: f64) -> f64 {
    if energy > 0.0 {
        (10.0 * energy.log10()).max(SILENCE_DB)
    } else {
        SILENCE_DB
    }
}

/// Energetic sum of levels.
pub fn sum_levels(levels: impl IntoIterator<Item = f64>) -> f64 {
    energy_to_db(levels.into_iter().map(db_to_energy).sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplSpectrum {
    pub band_centers: Vec<f64>,
    pub levels: Vec<f64>,
    /// True once A-weighting has been applied.
    pub weighted: bool,
}

impl SplSpectrum {
    pub fn silence() -> Self {
        Self::from_levels([SILENCE_DB; BAND_COUNT].to_vec(), false)
    }

    /// Spectrum on the standard band grid.
    pub fn from_levels(levels: Vec<f64>, weighted: bool) -> Self {
        assert_eq!(levels.len(), BAND_COUNT, "standard grid has {BAND_COUNT} bands");
        Self { band_centers: band_centers().to_vec(), levels, weighted }
    }

    pub(crate) fn from_energy(energy: &[f64; BAND_COUNT], weighted: bool) -> Self {
        Self::from_levels(energy.iter().map(|&e| energy_to_db(e)).collect(), weighted)
    }

    pub fn is_silent(&self) -> bool {
        self.levels.iter().all(|&l| l <= SILENCE_DB)
    }

    /// Energetic sum across bands.
    pub fn overall(&self) -> f64 {
        sum_levels(self.levels.iter().copied())
    }

    /// Adds the A-weighting correction to every band.
    pub fn a_weighted(&self) -> Result<Self, AcousticsError> {
        if self.weighted {
            return Err(AcousticsError::AlreadyWeighted);
        }
        let levels = self
            .band_centers
            .iter()
            .zip(&self.levels)
            .map(|(&f, &l)| if l <= SILENCE_DB { SILENCE_DB } else { l + a_weighting(f) })
            .collect();
        Ok(Self { band_centers: self.band_centers.clone(), levels, weighted: true })
    }

    /// Constant offset applied to every non-silent band.
    pub fn shifted(&self, db: f64) -> Self {
        let levels =
            self.levels.iter().map(|&l| if l <= SILENCE_DB { SILENCE_DB } else { (l + db).max(SILENCE_DB) }).collect();
        Self { levels, ..self.clone() }
    }

    /// `band_hz,level_db` rows with a header line.
    pub fn to_table(&self) -> String {
        let mut out = String::from("band_hz,level_db\n");
        for (f, l) in self.band_centers.iter().zip(&self.levels) {
            let _ = writeln!(out, "{f:.4},{l:.6}");
        }
        out
    }
}

/// Per-band energetic sum of uncorrelated sources.
pub fn combine_uncorrelated(spectra: &[SplSpectrum]) -> Result<SplSpectrum, AcousticsError> {
    let Some(first) = spectra.first() else {
        return Ok(SplSpectrum::silence());
    };
    for s in &spectra[1..] {
        if s.band_centers != first.band_centers || s.weighted != first.weighted {
            return Err(AcousticsError::GridMismatch);
        }
    }
    let levels = (0..first.levels.len()).map(|i| sum_levels(spectra.iter().map(|s| s.levels[i]))).collect();
    Ok(SplSpectrum { band_centers: first.band_centers.clone(), levels, weighted: first.weighted })
}

pub fn overall_spl(spec: &SplSpectrum) -> f64 {
    spec.overall()
}

pub fn a_weight(spec: &SplSpectrum) -> Result<SplSpectrum, AcousticsError> {
    spec.a_weighted()
}

/// IEC 61672 A-weighting correction at `f` Hz, dB.
pub fn a_weighting(f: f64) -> f64 {
    let f2 = f * f;
    let ra = 12194.0f64.powi(2) * f2 * f2
        / ((f2 + 20.6f64.powi(2))
            * ((f2 + 107.7f64.powi(2)) * (f2 + 737.9f64.powi(2))).sqrt()
            * (f2 + 12194.0f64.powi(2)));
    20.0 * ra.log10() + 2.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn single(level: f64) -> SplSpectrum {
        let mut s = SplSpectrum::silence();
        s.levels[20] = level;
        s
    }

    #[test]
    fn band_grid() {
        let b = band_centers();
        assert!((b[0] - 10.0).abs() < 1e-12);
        assert!((b[20] - 1000.0).abs() < 1e-9);
        assert!((b[30] - 10_000.0).abs() < 1e-8);
        for w in b.windows(2) {
            assert!((w[1] / w[0] - 10f64.powf(0.1)).abs() < 1e-12);
        }
    }

    #[test]
    fn level_addition_closed_forms() {
        let two = combine_uncorrelated(&[single(40.0), single(40.0)]).unwrap();
        assert!((two.levels[20] - 43.0103).abs() < 1e-4);
        let three = combine_uncorrelated(&[single(30.0), single(30.0), single(30.0)]).unwrap();
        assert!((three.levels[20] - 34.7712).abs() < 1e-4);
        let with_silence = combine_uncorrelated(&[single(52.5), SplSpectrum::silence()]).unwrap();
        assert_eq!(with_silence.levels[20], 52.5);
    }

    #[test]
    fn overall_closed_forms() {
        assert!((single(45.0).overall() - 45.0).abs() < 1e-12);
        let flat = SplSpectrum::from_levels(vec![30.0; BAND_COUNT], false);
        assert!((flat.overall() - (30.0 + 10.0 * 31f64.log10())).abs() < 1e-12);
        assert!((flat.overall() - 44.91).abs() < 5e-3);
        assert_eq!(SplSpectrum::silence().overall(), SILENCE_DB);
    }

    #[test]
    fn a_weighting_reference_points() {
        assert!(a_weighting(1000.0).abs() < 0.1);
        assert!((a_weighting(100.0) + 19.1).abs() < 0.2);
        assert!((a_weighting(10_000.0) + 2.5).abs() < 0.2);
    }

    #[test]
    fn weighting_twice_is_an_error() {
        let w = single(40.0).a_weighted().unwrap();
        assert!(matches!(w.a_weighted(), Err(AcousticsError::AlreadyWeighted)));
    }

    #[test]
    fn mismatched_flags_rejected() {
        let w = single(40.0).a_weighted().unwrap();
        assert!(matches!(combine_uncorrelated(&[w, single(40.0)]), Err(AcousticsError::GridMismatch)));
    }

    #[test]
    fn table_export() {
        let t = single(40.0).to_table();
        assert!(t.starts_with("band_hz,level_db\n"));
        assert_eq!(t.lines().count(), BAND_COUNT + 1);
    }

    fn spectrum() -> impl Strategy<Value = SplSpectrum> {
        prop::collection::vec(prop_oneof![Just(SILENCE_DB), -20.0..120.0f64], BAND_COUNT)
            .prop_map(|l| SplSpectrum::from_levels(l, false))
    }

    proptest! {
        #[test]
        fn combine_is_permutation_invariant(a in spectrum(), b in spectrum(), c in spectrum()) {
            let abc = combine_uncorrelated(&[a.clone(), b.clone(), c.clone()]).unwrap();
            let cab = combine_uncorrelated(&[c, a, b]).unwrap();
            for (x, y) in abc.levels.iter().zip(&cab.levels) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn combine_is_associative(a in spectrum(), b in spectrum(), c in spectrum()) {
            let ab = combine_uncorrelated(&[a.clone(), b.clone()]).unwrap();
            let nested = combine_uncorrelated(&[ab, c.clone()]).unwrap();
            let flat = combine_uncorrelated(&[a, b, c]).unwrap();
            for (x, y) in nested.levels.iter().zip(&flat.levels) {
                prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn adding_a_source_never_lowers_overall(a in spectrum(), b in spectrum()) {
            let sum = combine_uncorrelated(&[a.clone(), b]).unwrap();
            prop_assert!(sum.overall() >= a.overall() - 1e-12);
        }

        #[test]
        fn doubling_identical_sources_adds_3db(a in spectrum()) {
            prop_assume!(!a.is_silent());
            let two = combine_uncorrelated(&[a.clone(), a.clone()]).unwrap();
            prop_assert!((two.overall() - a.overall() - 10.0 * 2f64.log10()).abs() < 1e-9);
        }
    }
}
