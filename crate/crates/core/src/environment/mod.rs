//! The control environment: bounded (U, Ω, θ) state, five discrete actions,
//! wind processes and the power/noise reward.

mod cpnom;
mod wind;

pub use cpnom::{scan_cp_nominal, CpNominal, GridSpec};
pub use wind::{OuWind, WindDataError, WindProcess, WindSample, WindSeries, WIND_RANGE};

use rand::Rng;

use crate::acoustics::{turbine_spl, AcousticsConfig, AcousticsError, ObserverLocation};
use crate::turbine::{rotor_performance, rpm_to_rad_s, BemDiagnostics, BemOptions, RotorPerformance, TurbineGeometry};

#[derive(Debug, thiserror::Error)]
pub enum EnvError {
    #[error(transparent)]
    Acoustics(#[from] AcousticsError),
    #[error(transparent)]
    Wind(#[from] WindDataError),
    #[error("invalid environment configuration: {0}")]
    Config(String),
}

/// Operating point of the turbine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    /// m/s
    pub wind_speed: f64,
    /// rpm
    pub rotor_speed: f64,
    /// degrees
    pub pitch: f64,
}

impl EnvState {
    pub fn new(wind_speed: f64, rotor_speed: f64, pitch: f64) -> Self {
        Self { wind_speed, rotor_speed, pitch }
    }

    pub fn tip_speed_ratio(&self, blade_radius: f64) -> f64 {
        rpm_to_rad_s(self.rotor_speed) * blade_radius / self.wind_speed
    }
}

/// The admissible state box plus the tip-speed-ratio band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateBounds {
    pub wind: (f64, f64),
    pub rotor: (f64, f64),
    pub pitch: (f64, f64),
    pub tsr: (f64, f64),
}

impl Default for StateBounds {
    fn default() -> Self {
        Self { wind: (4.0, 16.0), rotor: (6.0, 18.0), pitch: (-5.0, 10.0), tsr: (3.0, 12.0) }
    }
}

fn within((lo, hi): (f64, f64), v: f64) -> bool {
    v >= lo && v <= hi
}

impl StateBounds {
    pub fn contains(&self, s: &EnvState, blade_radius: f64) -> bool {
        self.controls_within(s) && within(self.wind, s.wind_speed) && self.tsr_excess(s, blade_radius) == 0.0
    }

    fn controls_within(&self, s: &EnvState) -> bool {
        within(self.rotor, s.rotor_speed) && within(self.pitch, s.pitch)
    }

    /// Distance of λ outside its band, zero inside.
    pub fn tsr_excess(&self, s: &EnvState, blade_radius: f64) -> f64 {
        let tsr = s.tip_speed_ratio(blade_radius);
        (self.tsr.0 - tsr).max(tsr - self.tsr.1).max(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    IncreaseSpeed,
    DecreaseSpeed,
    IncreasePitch,
    DecreasePitch,
    Hold,
}

impl Action {
    pub const COUNT: usize = 5;
    pub const ALL: [Action; 5] =
        [Action::IncreaseSpeed, Action::DecreaseSpeed, Action::IncreasePitch, Action::DecreasePitch, Action::Hold];
    pub const SPEED_STEP_RPM: f64 = 0.5;
    pub const PITCH_STEP_DEG: f64 = 1.0;

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Short label `a1`..`a5`.
    pub fn label(self) -> &'static str {
        ["a1", "a2", "a3", "a4", "a5"][self.index()]
    }

    /// (Δrpm, Δpitch)
    pub fn increments(self) -> (f64, f64) {
        match self {
            Action::IncreaseSpeed => (Self::SPEED_STEP_RPM, 0.0),
            Action::DecreaseSpeed => (-Self::SPEED_STEP_RPM, 0.0),
            Action::IncreasePitch => (0.0, Self::PITCH_STEP_DEG),
            Action::DecreasePitch => (0.0, -Self::PITCH_STEP_DEG),
            Action::Hold => (0.0, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RewardConfig {
    /// dB(A)
    pub spl_threshold: f64,
    /// dB
    pub delta_db: f64,
    pub boundary_penalty: f64,
    pub cp_nom: f64,
    pub noise_term_enabled: bool,
}

impl RewardConfig {
    pub fn quiet(cp_nom: f64) -> Self {
        Self { spl_threshold: 45.0, delta_db: 5.0, boundary_penalty: -3.0, cp_nom, noise_term_enabled: true }
    }

    pub fn power(cp_nom: f64) -> Self {
        Self { noise_term_enabled: false, ..Self::quiet(cp_nom) }
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        if !(self.cp_nom > 0.0) {
            return Err(EnvError::Config(format!("cp_nom must be positive (got {})", self.cp_nom)));
        }
        if !(self.delta_db > 0.0) {
            return Err(EnvError::Config(format!("delta_db must be positive (got {})", self.delta_db)));
        }
        if !(self.boundary_penalty < -1.0) {
            return Err(EnvError::Config(format!("boundary_penalty must be below -1 (got {})", self.boundary_penalty)));
        }
        Ok(())
    }
}

/// Normalized power minus a linear penalty once the level exceeds the threshold.
pub fn reward(cp: f64, oaspl: f64, cfg: &RewardConfig) -> f64 {
    let power = cp / cfg.cp_nom;
    if !cfg.noise_term_enabled {
        return power;
    }
    power - ((oaspl - cfg.spl_threshold) / cfg.delta_db).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transition {
    Valid(EnvState),
    BoundaryViolation,
}

/// Applies an action's fixed increments to `state`.
///
/// The move is a violation if Ω or θ leaves its box, or if λ ends outside
/// its band without having moved closer to it. The latter only differs from
/// a plain bound check when the wind alone has pushed λ out, in which case
/// corrective actions are still accepted.
pub fn apply_action(state: &EnvState, action: Action, bounds: &StateBounds, blade_radius: f64) -> Transition {
    let (drpm, dpitch) = action.increments();
    let cand = EnvState { rotor_speed: state.rotor_speed + drpm, pitch: state.pitch + dpitch, ..*state };
    if !bounds.controls_within(&cand) {
        return Transition::BoundaryViolation;
    }
    let excess = bounds.tsr_excess(&cand, blade_radius);
    if excess > 0.0 && excess >= bounds.tsr_excess(state, blade_radius) {
        return Transition::BoundaryViolation;
    }
    Transition::Valid(cand)
}

/// Uniform over the state box, rejected until λ is admissible.
pub fn sample_initial_state(rng: &mut impl Rng, bounds: &StateBounds, blade_radius: f64) -> EnvState {
    let u = rng.random_range(bounds.wind.0..=bounds.wind.1);
    sample_initial_state_at(rng, u, bounds, blade_radius)
}

/// As [`sample_initial_state`] with the wind speed fixed.
pub fn sample_initial_state_at(rng: &mut impl Rng, wind_speed: f64, bounds: &StateBounds, blade_radius: f64) -> EnvState {
    loop {
        let s = EnvState::new(
            wind_speed,
            rng.random_range(bounds.rotor.0..=bounds.rotor.1),
            rng.random_range(bounds.pitch.0..=bounds.pitch.1),
        );
        if bounds.contains(&s, blade_radius) {
            return s;
        }
    }
}

/// The turbine model evaluated by environments and controllers.
#[derive(Debug, Clone)]
pub struct Plant {
    pub geometry: TurbineGeometry,
    pub bem: BemOptions,
    pub acoustics: AcousticsConfig,
    pub observer: ObserverLocation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub cp: f64,
    /// W
    pub power: f64,
    /// dB(A); `None` when acoustics were not requested.
    pub oaspl: Option<f64>,
    pub bem: BemDiagnostics,
}

impl Plant {
    pub fn new(geometry: TurbineGeometry) -> Self {
        Self {
            geometry,
            bem: BemOptions::default(),
            acoustics: AcousticsConfig::default(),
            observer: ObserverLocation::default(),
        }
    }

    pub fn bundled() -> Self {
        Self::new(TurbineGeometry::bundled())
    }

    pub fn blade_radius(&self) -> f64 {
        self.geometry.blade_radius
    }

    pub fn performance(&self, wind_speed: f64, rotor_rpm: f64, pitch: f64) -> RotorPerformance {
        rotor_performance(&self.geometry, wind_speed, rotor_rpm, pitch, &self.bem)
    }

    pub fn evaluate(&self, wind_speed: f64, rotor_rpm: f64, pitch: f64, with_noise: bool) -> Result<Evaluation, EnvError> {
        let perf = self.performance(wind_speed, rotor_rpm, pitch);
        let oaspl = if with_noise {
            Some(turbine_spl(&self.geometry, &perf, &self.observer, &self.acoustics)?.oaspl_dba)
        } else {
            None
        };
        Ok(Evaluation { cp: perf.cp, power: perf.power, oaspl, bem: perf.diagnostics })
    }

    pub fn evaluate_state(&self, s: &EnvState, with_noise: bool) -> Result<Evaluation, EnvError> {
        self.evaluate(s.wind_speed, s.rotor_speed, s.pitch, with_noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub bounds: StateBounds,
    pub reward: RewardConfig,
    /// Compute the noise level each step. Without it the reward has no noise
    /// term and `StepOutcome::oaspl` is `None`.
    pub evaluate_acoustics: bool,
}

impl EnvConfig {
    pub fn quiet(cp_nom: f64) -> Self {
        Self { bounds: StateBounds::default(), reward: RewardConfig::quiet(cp_nom), evaluate_acoustics: true }
    }

    /// Power-only reward; acoustics skipped entirely.
    pub fn power(cp_nom: f64) -> Self {
        Self { bounds: StateBounds::default(), reward: RewardConfig::power(cp_nom), evaluate_acoustics: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub state: EnvState,
    pub action: Action,
    pub next_state: EnvState,
    pub reward: f64,
    pub cp: f64,
    pub power: f64,
    pub oaspl: Option<f64>,
    pub boundary_violation: bool,
    /// The wind source has no further samples.
    pub truncated: bool,
    pub bem: BemDiagnostics,
}

/// Stateful environment: a current operating point plus its wind source.
#[derive(Debug, Clone)]
pub struct Environment<'p> {
    plant: &'p Plant,
    cfg: EnvConfig,
    wind: WindProcess,
    state: EnvState,
    acoustic_calls: u64,
    bem_failures: u64,
}

impl<'p> Environment<'p> {
    pub fn new(plant: &'p Plant, cfg: EnvConfig, wind: WindProcess, rotor_speed: f64, pitch: f64) -> Result<Self, EnvError> {
        cfg.reward.validate()?;
        if cfg.reward.noise_term_enabled && !cfg.evaluate_acoustics {
            return Err(EnvError::Config("the noise term needs evaluate_acoustics".into()));
        }
        let state = EnvState::new(wind.current(), rotor_speed, pitch);
        Ok(Self { plant, cfg, wind, state, acoustic_calls: 0, bem_failures: 0 })
    }

    pub fn state(&self) -> EnvState {
        self.state
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn plant(&self) -> &Plant {
        self.plant
    }

    pub fn wind(&self) -> &WindProcess {
        &self.wind
    }

    /// Number of noise evaluations performed so far.
    pub fn acoustic_calls(&self) -> u64 {
        self.acoustic_calls
    }

    /// Steps whose BEM solve had at least one failed segment.
    pub fn bem_failures(&self) -> u64 {
        self.bem_failures
    }

    /// Restarts from `state` under steady wind at its speed.
    pub fn reset_steady(&mut self, state: EnvState) {
        self.wind = WindProcess::steady(state.wind_speed);
        self.state = EnvState { wind_speed: self.wind.current(), ..state };
    }

    /// Replaces the wind source and control variables.
    pub fn reset(&mut self, wind: WindProcess, rotor_speed: f64, pitch: f64) {
        self.wind = wind;
        self.state = EnvState::new(self.wind.current(), rotor_speed, pitch);
    }

    /// Wind advances first, then the action (possibly revoked) is applied and
    /// the reward is evaluated at the resulting state.
    pub fn step(&mut self, action: Action) -> Result<StepOutcome, EnvError> {
        let before = self.state;
        let sample = self.wind.advance();
        let windy = EnvState { wind_speed: sample.speed, ..before };
        let (next, violation) = match apply_action(&windy, action, &self.cfg.bounds, self.plant.blade_radius()) {
            Transition::Valid(s) => (s, false),
            Transition::BoundaryViolation => (windy, true),
        };
        let eval = self.plant.evaluate_state(&next, self.cfg.evaluate_acoustics)?;
        if eval.oaspl.is_some() {
            self.acoustic_calls += 1;
        }
        if eval.bem.failed_segments() > 0 {
            self.bem_failures += 1;
        }
        let reward = if violation {
            self.cfg.reward.boundary_penalty
        } else {
            reward(eval.cp, eval.oaspl.unwrap_or(f64::NEG_INFINITY), &self.cfg.reward)
        };
        self.state = next;
        Ok(StepOutcome {
            state: before,
            action,
            next_state: next,
            reward,
            cp: eval.cp,
            power: eval.power,
            oaspl: eval.oaspl,
            boundary_violation: violation,
            truncated: sample.exhausted,
            bem: eval.bem,
        })
    }
}
