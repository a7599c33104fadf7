use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use quietrotor::acoustics::{AcousticsConfig, ObserverLocation};
use quietrotor::baseline_control::{pitch_sensitivity_sign, region_iii_test_winds, tune_region_boundaries, ClassicController, ControlRegions, PidGains};
use quietrotor::environment::{scan_cp_nominal, CpNominal, EnvConfig, GridSpec, Plant, RewardConfig, StateBounds, WindSeries};
use quietrotor::qnet::{Mlp, ARCHITECTURE};
use quietrotor::simulation::ControllerKind;
use quietrotor::turbine::TurbineGeometry;

use crate::config::RunConfig;
use crate::CliError;

/// Everything a command needs, built once from the configuration.
pub struct Ctx {
    pub cfg: RunConfig,
    pub hash: String,
    pub plant: Plant,
    pub bounds: StateBounds,
    pub nominal: CpNominal,
}

#[derive(Serialize, Deserialize)]
struct CachedNominal {
    key: String,
    cp_nom: f64,
    wind_speed: f64,
    rotor_speed: f64,
    pitch: f64,
    tsr: f64,
    evaluated: usize,
}

fn load_geometry(cfg: &RunConfig) -> Result<TurbineGeometry, CliError> {
    let Some(path) = &cfg.turbine.geometry else {
        return Ok(TurbineGeometry::bundled());
    };
    if !path.is_file() {
        return Err(CliError::Validation(format!("geometry file not found: {}", path.display())));
    }
    let polar_dir = cfg
        .turbine
        .polar_dir
        .clone()
        .unwrap_or_else(|| path.parent().unwrap_or(Path::new(".")).join("polars"));
    TurbineGeometry::load(path, &polar_dir)
        .map_err(|e| CliError::Validation(format!("loading geometry {}: {e}", path.display())))
}

impl Ctx {
    pub fn new(cfg: RunConfig) -> Result<Self, CliError> {
        let geometry = load_geometry(&cfg)?;
        let mut plant = Plant::new(geometry);
        plant.bem.air_density = cfg.turbine.air_density;
        let a = &cfg.acoustics;
        plant.acoustics = AcousticsConfig {
            air_density: cfg.turbine.air_density,
            gain_db: a.gain_db,
            turbulence_intensity: a.turbulence_intensity,
            turbulence_length_scale: a.turbulence_length_scale_m,
            ..AcousticsConfig::default()
        };
        plant.observer = ObserverLocation::new([a.observer_downwind_m, 0.0, -a.hub_height_m]);
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| CliError::Runtime(format!("creating {}: {e}", cfg.out_dir.display())))?;
        let bounds = StateBounds::default();
        let hash = cfg.hash();
        let nominal = cached_nominal(&plant, &bounds, &cfg.out_dir)?;
        Ok(Self { cfg, hash, plant, bounds, nominal })
    }

    pub fn out(&self, name: &str) -> PathBuf {
        self.cfg.out_dir.join(name)
    }

    pub fn reward(&self, kind: ControllerKind) -> RewardConfig {
        let r = &self.cfg.reward;
        let base = match kind {
            ControllerKind::PowerDdqn => RewardConfig::power(self.nominal.cp_nom),
            _ => RewardConfig::quiet(self.nominal.cp_nom),
        };
        RewardConfig { spl_threshold: r.spl_threshold_db, delta_db: r.delta_db, boundary_penalty: r.boundary_penalty, ..base }
    }

    pub fn env_config(&self, kind: ControllerKind) -> EnvConfig {
        let reward = self.reward(kind);
        EnvConfig { bounds: self.bounds, reward, evaluate_acoustics: reward.noise_term_enabled }
    }

    pub fn regions(&self) -> ControlRegions {
        let c = &self.cfg.controller;
        tune_region_boundaries(&self.plant, &self.nominal, &self.bounds, c.cut_in, c.cut_off)
    }

    pub fn gains(&self, regions: &ControlRegions) -> PidGains {
        let c = &self.cfg.controller;
        let winds = region_iii_test_winds(regions);
        let probe = winds.get(winds.len() / 2).copied().unwrap_or(regions.cut_off);
        PidGains { kp: c.kp, ki: c.ki, kd: c.kd, direction: pitch_sensitivity_sign(&self.plant, regions, probe) }
    }

    pub fn classic(&self) -> ClassicController {
        let regions = self.regions();
        let gains = self.gains(&regions);
        ClassicController::new(regions, gains)
    }

    pub fn weights_path(&self, kind: ControllerKind) -> PathBuf {
        self.out(&format!("weights_{}.bin", kind.name()))
    }

    pub fn load_agent(&self, kind: ControllerKind) -> Result<Mlp, CliError> {
        let path = self.weights_path(kind);
        if !path.is_file() {
            return Err(CliError::Validation(format!(
                "missing weights {} (run `train --agent {}` first)",
                path.display(),
                kind.name()
            )));
        }
        Mlp::load_with_architecture(&path, &ARCHITECTURE).map_err(|e| CliError::Validation(e.to_string()))
    }

    pub fn load_wind(&self, path: &Path) -> Result<WindSeries, CliError> {
        WindSeries::load_csv(path, self.cfg.wind.bin_seconds)
            .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }
}

/// Nominal Cp from the grid scan, cached under the output directory keyed by
/// the plant and the scan settings.
fn cached_nominal(plant: &Plant, bounds: &StateBounds, out_dir: &Path) -> Result<CpNominal, CliError> {
    let grid = GridSpec::default();
    let key_text = format!("{:?}|{:?}|{:?}|{:?}", plant.geometry, plant.bem, bounds, grid);
    let key = hex::encode(Sha256::digest(key_text.as_bytes()));
    let dir = out_dir.join("cache");
    let path = dir.join(format!("cp_nom_{}.json", &key[..16]));
    if let Ok(text) = std::fs::read_to_string(&path) {
        if let Ok(c) = serde_json::from_str::<CachedNominal>(&text) {
            if c.key == key {
                return Ok(CpNominal {
                    cp_nom: c.cp_nom,
                    wind_speed: c.wind_speed,
                    rotor_speed: c.rotor_speed,
                    pitch: c.pitch,
                    tsr: c.tsr,
                    evaluated: c.evaluated,
                });
            }
        }
    }
    let n = scan_cp_nominal(plant, bounds, grid);
    let cached = CachedNominal {
        key,
        cp_nom: n.cp_nom,
        wind_speed: n.wind_speed,
        rotor_speed: n.rotor_speed,
        pitch: n.pitch,
        tsr: n.tsr,
        evaluated: n.evaluated,
    };
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Runtime(format!("creating {}: {e}", dir.display())))?;
    std::fs::write(&path, serde_json::to_string_pretty(&cached).expect("serialisable"))
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))?;
    Ok(n)
}
