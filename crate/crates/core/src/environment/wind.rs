//! Wind-speed processes driving the environment, and wind CSV ingestion.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDateTime;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Speeds outside this interval are clipped.
pub const WIND_RANGE: (f64, f64) = (4.0, 16.0);

#[derive(Debug, thiserror::Error)]
pub enum WindDataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("row {row}: {reason}")]
    Row { row: usize, reason: String },
    #[error("missing column '{0}' in header")]
    MissingColumn(&'static str),
    #[error("wind series is empty")]
    Empty,
}

/// An evenly spaced wind-speed series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindSeries {
    pub speeds: Vec<f64>,
    /// Seconds between samples.
    pub dt: f64,
    /// Samples altered by clipping to [`WIND_RANGE`].
    pub clipped: usize,
    /// Empty bins filled by carrying the previous bin forward.
    pub filled_gaps: usize,
}

impl WindSeries {
    /// Wraps speeds already on a regular grid, clipping to [`WIND_RANGE`].
    pub fn from_speeds(speeds: Vec<f64>, dt: f64) -> Result<Self, WindDataError> {
        if speeds.is_empty() {
            return Err(WindDataError::Empty);
        }
        let mut clipped = 0;
        let speeds = speeds
            .into_iter()
            .map(|u| {
                let c = u.clamp(WIND_RANGE.0, WIND_RANGE.1);
                if c != u {
                    clipped += 1;
                }
                c
            })
            .collect();
        if clipped > 0 {
            log::info!("clipped {clipped} wind samples to [{}, {}] m/s", WIND_RANGE.0, WIND_RANGE.1);
        }
        Ok(Self { speeds, dt, clipped, filled_gaps: 0 })
    }

    pub fn len(&self) -> usize {
        self.speeds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.speeds.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.speeds.iter().sum::<f64>() / self.speeds.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        (self.speeds.iter().map(|u| (u - m).powi(2)).sum::<f64>() / self.speeds.len() as f64).sqrt()
    }

    pub fn load_csv(path: &Path, bin_seconds: f64) -> Result<Self, WindDataError> {
        let file =
            std::fs::File::open(path).map_err(|e| WindDataError::Io { path: path.display().to_string(), source: e })?;
        Self::read_csv(file, bin_seconds)
    }

    /// Reads `timestamp,wind_speed_ms[,direction_deg]` rows and averages them
    /// into bins of `bin_seconds`. Direction is ignored. Timestamps are either
    /// seconds or `YYYY-MM-DD[T ]HH:MM[:SS]`. Rows are numbered from 1 at the
    /// header line.
    pub fn read_csv(reader: impl Read, bin_seconds: f64) -> Result<Self, WindDataError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(reader);
        let headers = rdr.headers().map_err(|e| WindDataError::Row { row: 1, reason: e.to_string() })?.clone();
        let col = |name: &'static str| headers.iter().position(|h| h == name).ok_or(WindDataError::MissingColumn(name));
        let t_col = col("timestamp")?;
        let u_col = col("wind_speed_ms")?;

        let mut samples: Vec<(f64, f64)> = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| WindDataError::Row {
                row: e.position().map_or(0, |p| p.line() as usize),
                reason: e.to_string(),
            })?;
            let row = rec.position().map_or(0, |p| p.line() as usize);
            let bad = |reason: String| WindDataError::Row { row, reason };
            let t = parse_timestamp(rec.get(t_col).unwrap_or("")).map_err(bad)?;
            let raw = rec.get(u_col).unwrap_or("");
            let u: f64 = raw.parse().map_err(|_| bad(format!("wind speed '{raw}' is not a number")))?;
            if !u.is_finite() || u < 0.0 {
                return Err(bad(format!("wind speed {u} must be finite and non-negative")));
            }
            if let Some(&(prev, _)) = samples.last() {
                if t <= prev {
                    return Err(bad("timestamps must be strictly increasing".into()));
                }
            }
            samples.push((t, u));
        }
        let Some(&(t0, _)) = samples.first() else {
            return Err(WindDataError::Empty);
        };

        let n_bins = ((samples.last().unwrap().0 - t0) / bin_seconds).floor() as usize + 1;
        let mut sums = vec![0.0; n_bins];
        let mut counts = vec![0usize; n_bins];
        for &(t, u) in &samples {
            let b = ((t - t0) / bin_seconds).floor() as usize;
            sums[b] += u;
            counts[b] += 1;
        }
        let mut filled = 0;
        let mut speeds = Vec::with_capacity(n_bins);
        for (s, c) in sums.iter().zip(&counts) {
            if *c > 0 {
                speeds.push(s / *c as f64);
            } else {
                filled += 1;
                speeds.push(*speeds.last().expect("first bin always holds a sample"));
            }
        }
        if filled > 0 {
            log::warn!("{filled} empty {bin_seconds} s wind bins filled from the previous bin");
        }
        let mut series = Self::from_speeds(speeds, bin_seconds)?;
        series.filled_gaps = filled;
        Ok(series)
    }
}

fn parse_timestamp(s: &str) -> Result<f64, String> {
    if let Ok(v) = s.parse::<f64>() {
        return Ok(v);
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M", "%Y-%m-%d %H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Ok(t.and_utc().timestamp() as f64);
        }
    }
    Err(format!("unrecognised timestamp '{s}'"))
}

/// Mean-reverting (Ornstein–Uhlenbeck) wind with a seeded private generator.
#[derive(Debug, Clone)]
pub struct OuWind {
    pub mean: f64,
    pub turbulence_intensity: f64,
    /// Seconds.
    pub time_constant: f64,
    /// Seconds per step.
    pub dt: f64,
    seed: u64,
    rng: ChaCha8Rng,
    current: f64,
    pub clipped: usize,
}

impl OuWind {
    pub fn new(mean: f64, turbulence_intensity: f64, time_constant: f64, dt: f64, seed: u64) -> Self {
        Self {
            mean,
            turbulence_intensity,
            time_constant,
            dt,
            seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
            current: mean.clamp(WIND_RANGE.0, WIND_RANGE.1),
            clipped: 0,
        }
    }

    fn advance(&mut self) -> f64 {
        let decay = (-self.dt / self.time_constant).exp();
        let sigma = self.turbulence_intensity * self.mean;
        let xi: f64 = StandardNormal.sample(&mut self.rng);
        let next = self.mean + (self.current - self.mean) * decay + sigma * (1.0 - decay * decay).sqrt() * xi;
        let c = next.clamp(WIND_RANGE.0, WIND_RANGE.1);
        if c != next {
            self.clipped += 1;
            log::trace!("synthetic wind {next:.3} clipped to {c}");
        }
        self.current = c;
        c
    }
}

/// Source of the free-stream wind speed, advanced once per control step.
#[derive(Debug, Clone)]
pub enum WindProcess {
    Steady(f64),
    Replay { series: WindSeries, cursor: usize },
    Synthetic(OuWind),
}

/// Result of advancing a wind process by one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindSample {
    pub speed: f64,
    /// Set once a replayed series has delivered its last sample.
    pub exhausted: bool,
}

impl WindProcess {
    pub fn steady(speed: f64) -> Self {
        Self::Steady(speed.clamp(WIND_RANGE.0, WIND_RANGE.1))
    }

    pub fn replay(series: WindSeries) -> Self {
        Self::Replay { series, cursor: 0 }
    }

    pub fn current(&self) -> f64 {
        match self {
            Self::Steady(u) => *u,
            Self::Replay { series, cursor } => series.speeds[*cursor],
            Self::Synthetic(ou) => ou.current,
        }
    }

    pub fn advance(&mut self) -> WindSample {
        match self {
            Self::Steady(u) => WindSample { speed: *u, exhausted: false },
            Self::Replay { series, cursor } => {
                if *cursor + 1 < series.len() {
                    *cursor += 1;
                }
                WindSample { speed: series.speeds[*cursor], exhausted: *cursor + 1 >= series.len() }
            }
            Self::Synthetic(ou) => WindSample { speed: ou.advance(), exhausted: false },
        }
    }

    /// Rewinds to the first sample (the synthetic generator is reseeded).
    pub fn reset(&mut self) {
        match self {
            Self::Steady(_) => {}
            Self::Replay { cursor, .. } => *cursor = 0,
            Self::Synthetic(ou) => *ou = OuWind::new(ou.mean, ou.turbulence_intensity, ou.time_constant, ou.dt, ou.seed),
        }
    }
}
