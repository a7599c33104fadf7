use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use quietrotor::agent::TrainConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    Desk,
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    pub profile: Profile,
    pub out_dir: PathBuf,
    pub turbine: TurbineSection,
    pub acoustics: AcousticsSection,
    pub reward: RewardSection,
    pub train: TrainSection,
    pub controller: ControllerSection,
    pub wind: WindSection,
    pub pareto: ParetoSection,
    pub annual: AnnualSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TurbineSection {
    /// Geometry file; the bundled rotor when absent.
    pub geometry: Option<PathBuf>,
    /// Directory of `<airfoil_id>.polar` files; defaults to `polars/` beside the geometry.
    pub polar_dir: Option<PathBuf>,
    pub air_density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AcousticsSection {
    pub observer_downwind_m: f64,
    pub hub_height_m: f64,
    pub gain_db: f64,
    pub turbulence_intensity: f64,
    pub turbulence_length_scale_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RewardSection {
    pub spl_threshold_db: f64,
    pub delta_db: f64,
    pub boundary_penalty: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    /// Overrides the profile's interaction count.
    pub total_env_interactions: Option<usize>,
    /// Overrides the profile's replayed updates per iteration.
    pub updates_per_iteration: Option<usize>,
    pub steps_per_iteration: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon: f64,
    pub tau: f64,
    pub target_update_period: usize,
    pub episode_length: usize,
    pub replay_capacity: usize,
    /// Iterations between weight checkpoints; 0 disables them.
    pub checkpoint_every: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControllerSection {
    pub cut_in: f64,
    pub cut_off: f64,
    /// s
    pub dt: f64,
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WindSection {
    pub simulate: PathBuf,
    pub epc: PathBuf,
    pub bin_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParetoSection {
    pub wind_speed: f64,
    pub cloud_points: usize,
    pub rollout_steps: usize,
    /// `[rotor rpm, pitch deg]` pairs.
    pub initial_states: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnnualSection {
    /// Long-term wind statistics; ignored when `wind_stats_csv` is set.
    pub wind_mean: f64,
    pub wind_std: f64,
    pub wind_stats_csv: Option<PathBuf>,
    pub epc_bin_width: f64,
    pub gp_resolution: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            profile: Profile::Desk,
            out_dir: PathBuf::from("out"),
            turbine: TurbineSection::default(),
            acoustics: AcousticsSection::default(),
            reward: RewardSection::default(),
            train: TrainSection::default(),
            controller: ControllerSection::default(),
            wind: WindSection::default(),
            pareto: ParetoSection::default(),
            annual: AnnualSection::default(),
        }
    }
}

impl Default for TurbineSection {
    fn default() -> Self {
        Self { geometry: None, polar_dir: None, air_density: 1.225 }
    }
}

impl Default for AcousticsSection {
    fn default() -> Self {
        Self {
            observer_downwind_m: 100.0,
            hub_height_m: 80.0,
            gain_db: quietrotor::acoustics::AcousticsConfig::BUNDLED_GAIN_DB,
            turbulence_intensity: 0.1,
            turbulence_length_scale_m: 50.0,
        }
    }
}

impl Default for RewardSection {
    fn default() -> Self {
        Self { spl_threshold_db: 45.0, delta_db: 5.0, boundary_penalty: -3.0 }
    }
}

impl Default for TrainSection {
    fn default() -> Self {
        let p = TrainConfig::paper();
        Self {
            total_env_interactions: None,
            updates_per_iteration: None,
            steps_per_iteration: p.steps_per_iteration,
            batch_size: p.batch_size,
            learning_rate: p.learning_rate,
            discount: p.discount,
            epsilon: p.epsilon,
            tau: p.tau,
            target_update_period: p.target_update_period,
            episode_length: p.episode_length,
            replay_capacity: p.replay_capacity,
            checkpoint_every: 1000,
        }
    }
}

impl Default for ControllerSection {
    fn default() -> Self {
        Self { cut_in: 4.0, cut_off: 16.0, dt: 60.0, kp: 2.0, ki: 2.0 / 60.0, kd: 0.0 }
    }
}

impl Default for WindSection {
    fn default() -> Self {
        Self {
            simulate: PathBuf::from("data/wind/below_rated_8h.csv"),
            epc: PathBuf::from("data/wind/mixed_100h.csv"),
            bin_seconds: 60.0,
        }
    }
}

impl Default for ParetoSection {
    fn default() -> Self {
        Self {
            wind_speed: 10.0,
            cloud_points: 1000,
            rollout_steps: 40,
            initial_states: vec![[9.61, 9.94], [17.98, 3.87], [8.43, -1.25], [16.54, 8.37]],
        }
    }
}

impl Default for AnnualSection {
    fn default() -> Self {
        Self { wind_mean: 4.5549, wind_std: 3.8272, wind_stats_csv: None, epc_bin_width: 0.5, gp_resolution: 0.1 }
    }
}

/// A configuration problem, located in the source file when possible.
#[derive(Debug, thiserror::Error)]
#[error("{location}: {message}")]
pub struct ConfigError {
    pub location: String,
    pub message: String,
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].bytes().filter(|&b| b == b'\n').count() + 1
}

/// 1-based line of `key` inside `[section]` (top level when `section` is empty).
pub fn find_key_line(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            current = name.trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

impl RunConfig {
    /// Parses TOML text; `origin` names the source in messages and relative
    /// paths are resolved against `base_dir`.
    pub fn parse(text: &str, origin: &str, base_dir: &Path) -> Result<Self, ConfigError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| ConfigError {
            location: match e.span() {
                Some(span) => format!("{origin}:{}", line_of_offset(text, span.start)),
                None => origin.to_string(),
            },
            message: e.message().to_string(),
        })?;
        cfg.resolve_paths(base_dir);
        cfg.validate().map_err(|(section, key, message)| ConfigError {
            location: match find_key_line(text, section, key) {
                Some(line) => format!("{origin}:{line}"),
                None => format!("{origin} [{section}] {key}"),
            },
            message,
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            location: path.display().to_string(),
            message: format!("cannot read config: {e}"),
        })?;
        let base = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        Self::parse(&text, &path.display().to_string(), base)
    }

    pub(crate) fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = self.turbine.geometry.as_mut() {
            fix(p);
        }
        if let Some(p) = self.turbine.polar_dir.as_mut() {
            fix(p);
        }
        if let Some(p) = self.annual.wind_stats_csv.as_mut() {
            fix(p);
        }
        fix(&mut self.wind.simulate);
        fix(&mut self.wind.epc);
        fix(&mut self.out_dir);
    }

    /// Semantic checks; errors carry `(section, key, message)`.
    pub fn validate(&self) -> Result<(), (&'static str, &'static str, String)> {
        fn positive(section: &'static str, key: &'static str, v: f64) -> Result<(), (&'static str, &'static str, String)> {
            if v > 0.0 && v.is_finite() { Ok(()) } else { Err((section, key, format!("must be positive (got {v})"))) }
        }
        positive("turbine", "air_density", self.turbine.air_density)?;
        positive("acoustics", "observer_downwind_m", self.acoustics.observer_downwind_m)?;
        positive("acoustics", "turbulence_length_scale_m", self.acoustics.turbulence_length_scale_m)?;
        if !(self.acoustics.turbulence_intensity >= 0.0) {
            return Err(("acoustics", "turbulence_intensity", "must be non-negative".into()));
        }
        positive("reward", "delta_db", self.reward.delta_db)?;
        if self.reward.boundary_penalty > 0.0 {
            return Err(("reward", "boundary_penalty", "must not be positive".into()));
        }
        let t = self.train_config();
        if let Err(e) = t.validate() {
            let key = match () {
                _ if !(t.learning_rate > 0.0) => "learning_rate",
                _ if !(t.discount > 0.0 && t.discount < 1.0) => "discount",
                _ if !(t.tau > 0.0 && t.tau <= 1.0) => "tau",
                _ if !(0.0..=1.0).contains(&t.epsilon) => "epsilon",
                _ => "batch_size",
            };
            return Err(("train", key, e.to_string()));
        }
        let c = &self.controller;
        positive("controller", "dt", c.dt)?;
        if !(c.cut_in > 0.0 && c.cut_in < c.cut_off) {
            return Err(("controller", "cut_in", format!("need 0 < cut_in < cut_off (got {} and {})", c.cut_in, c.cut_off)));
        }
        if c.kp < 0.0 || c.ki < 0.0 || c.kd < 0.0 {
            return Err(("controller", "kp", "PID gains must be non-negative".into()));
        }
        positive("wind", "bin_seconds", self.wind.bin_seconds)?;
        positive("pareto", "wind_speed", self.pareto.wind_speed)?;
        positive("annual", "wind_mean", self.annual.wind_mean)?;
        positive("annual", "wind_std", self.annual.wind_std)?;
        positive("annual", "epc_bin_width", self.annual.epc_bin_width)?;
        positive("annual", "gp_resolution", self.annual.gp_resolution)?;
        Ok(())
    }

    pub fn train_config(&self) -> TrainConfig {
        let base = match self.profile {
            Profile::Desk => TrainConfig::desk(),
            Profile::Paper => TrainConfig::paper(),
        };
        let t = &self.train;
        TrainConfig {
            total_env_interactions: t.total_env_interactions.unwrap_or(base.total_env_interactions),
            updates_per_iteration: t.updates_per_iteration.unwrap_or(base.updates_per_iteration),
            steps_per_iteration: t.steps_per_iteration,
            batch_size: t.batch_size,
            learning_rate: t.learning_rate,
            discount: t.discount,
            epsilon: t.epsilon,
            epsilon_final: None,
            tau: t.tau,
            target_update_period: t.target_update_period,
            episode_length: t.episode_length,
            replay_capacity: t.replay_capacity,
            seed: self.seed,
        }
    }

    /// SHA-256 over the configuration without its output directory.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.out_dir = PathBuf::new();
        let json = serde_json::to_string(&c).expect("config serialises");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}
