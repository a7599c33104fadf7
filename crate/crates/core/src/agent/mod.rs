//! Double deep Q-learning: ε-greedy behaviour, experience replay, decoupled
//! action selection and evaluation, soft target updates.

mod replay;
pub mod toy;

pub use replay::{ReplayBuffer, Transition};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::environment::{
    sample_initial_state, sample_initial_state_at, Action, EnvError, EnvState, Environment, StepOutcome,
};
use crate::qnet::{encode_state, Mlp, QnetError, TdSample};

pub const N_ACTIONS: usize = Action::COUNT;

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Qnet(#[from] QnetError),
    #[error("training diverged at iteration {iteration}: loss {loss}")]
    Diverged { iteration: usize, loss: f64 },
    #[error("invalid training configuration: {0}")]
    Config(String),
}

/// A trainable action-value function over 3-feature inputs.
pub trait QModel: Clone {
    fn q_values(&self, features: &[f64; 3]) -> [f64; N_ACTIONS];
    /// Mean squared TD error and its gradient with respect to the parameters.
    fn loss_and_gradient(&self, batch: &[TdSample]) -> (f64, Vec<f64>);
    fn parameters(&self) -> &[f64];
    fn parameters_mut(&mut self) -> &mut [f64];
}

impl QModel for Mlp {
    fn q_values(&self, features: &[f64; 3]) -> [f64; N_ACTIONS] {
        let q = self.forward(features);
        std::array::from_fn(|i| q[i])
    }

    fn loss_and_gradient(&self, batch: &[TdSample]) -> (f64, Vec<f64>) {
        self.backward(batch)
    }

    fn parameters(&self) -> &[f64] {
        Mlp::parameters(self)
    }

    fn parameters_mut(&mut self) -> &mut [f64] {
        Mlp::parameters_mut(self)
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy choice; returns the action and the model's Q-values.
pub fn select_action<M: QModel>(model: &M, features: &[f64; 3], epsilon: f64, rng: &mut impl Rng) -> (usize, [f64; N_ACTIONS]) {
    let q = model.q_values(features);
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        (rng.random_range(0..N_ACTIONS), q)
    } else {
        (argmax(&q), q)
    }
}

/// `y = r + γ·Q_target(s', argmax_a Q_primary(s', a))` for every row.
/// Time-limit truncations bootstrap like any other transition.
pub fn td_targets<M: QModel>(primary: &M, target: &M, batch: &[Transition], gamma: f64) -> Vec<f64> {
    batch
        .iter()
        .map(|t| {
            if gamma == 0.0 {
                return t.r;
            }
            let a_star = argmax(&primary.q_values(&t.s_next));
            t.r + gamma * target.q_values(&t.s_next)[a_star]
        })
        .collect()
}

/// `φ' ← τ·φ + (1−τ)·φ'`.
pub fn soft_update<M: QModel>(primary: &M, target: &mut M, tau: f64) -> Result<(), AgentError> {
    let src = primary.parameters();
    let dst = target.parameters_mut();
    if src.len() != dst.len() {
        return Err(QnetError::ShapeMismatch { expected: dst.len(), found: src.len() }.into());
    }
    if tau == 1.0 {
        dst.copy_from_slice(src);
        return Ok(());
    }
    for (d, s) in dst.iter_mut().zip(src) {
        *d = tau * s + (1.0 - tau) * *d;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub total_env_interactions: usize,
    pub steps_per_iteration: usize,
    /// Replayed mini-batch updates after each iteration's steps.
    pub updates_per_iteration: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub discount: f64,
    pub epsilon: f64,
    /// Linear decay target for ε over the run; `None` keeps ε constant.
    pub epsilon_final: Option<f64>,
    pub tau: f64,
    /// Iterations between soft target updates.
    pub target_update_period: usize,
    pub episode_length: usize,
    pub replay_capacity: usize,
    pub seed: u64,
}

impl TrainConfig {
    /// Full-length schedule.
    pub fn paper() -> Self {
        Self {
            total_env_interactions: 200_000,
            steps_per_iteration: 5,
            updates_per_iteration: 1,
            batch_size: 64,
            learning_rate: 5e-4,
            discount: 0.95,
            epsilon: 0.5,
            epsilon_final: None,
            tau: 0.1,
            target_update_period: 20,
            episode_length: 20,
            replay_capacity: 50_000,
            seed: 0,
        }
    }

    /// 20,000 interactions with ten replayed updates per iteration.
    pub fn desk() -> Self {
        Self { total_env_interactions: 20_000, updates_per_iteration: 10, ..Self::paper() }
    }

    pub fn iterations(&self) -> usize {
        self.total_env_interactions.div_ceil(self.steps_per_iteration)
    }

    pub fn validate(&self) -> Result<(), AgentError> {
        let bad = |m: String| Err(AgentError::Config(m));
        if self.total_env_interactions == 0
            || self.steps_per_iteration == 0
            || self.updates_per_iteration == 0
            || self.batch_size == 0
            || self.target_update_period == 0
            || self.episode_length == 0
            || self.replay_capacity == 0
        {
            return bad("counts must be positive".into());
        }
        if !(self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive (got {})", self.learning_rate));
        }
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad(format!("discount must lie in (0, 1) (got {})", self.discount));
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad(format!("tau must lie in (0, 1] (got {})", self.tau));
        }
        for e in std::iter::once(self.epsilon).chain(self.epsilon_final) {
            if !(0.0..=1.0).contains(&e) {
                return bad(format!("epsilon must lie in [0, 1] (got {e})"));
            }
        }
        Ok(())
    }

    fn epsilon_at(&self, iteration: usize) -> f64 {
        match self.epsilon_final {
            None => self.epsilon,
            Some(f) => {
                let frac = iteration as f64 / (self.iterations().max(2) - 1) as f64;
                self.epsilon + (f - self.epsilon) * frac.min(1.0)
            }
        }
    }
}

/// What an environment reports after one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Feedback {
    pub reward: f64,
    pub next: [f64; 3],
    /// The environment cannot continue this episode (e.g. replayed wind ran out).
    pub truncated: bool,
}

/// Environment interface used by the training loop.
pub trait TrainingEnv {
    /// Starts a new episode and returns its encoded initial state.
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Result<[f64; 3], AgentError>;
    fn step(&mut self, action: usize) -> Result<Feedback, AgentError>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub env_steps: usize,
    /// `None` until the buffer holds a full batch.
    pub loss: Option<f64>,
    /// Mean primary-network Q of the actions taken this iteration.
    pub mean_q: f64,
    pub epsilon: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    pub primary: M,
    pub target: M,
    pub log: Vec<IterationRecord>,
}

/// Runs the DDQN loop: each iteration takes `steps_per_iteration` ε-greedy
/// steps, then `updates_per_iteration` Adam steps on replayed batches once
/// the buffer holds `batch_size` transitions; every `target_update_period` iterations the
/// target is soft-updated. `on_iteration` sees each record and the primary.
pub fn train<M: QModel, E: TrainingEnv>(
    env: &mut E,
    initial: M,
    cfg: &TrainConfig,
    mut on_iteration: impl FnMut(&IterationRecord, &M),
) -> Result<TrainOutcome<M>, AgentError> {
    cfg.validate()?;
    let mut explore_rng = stream(cfg.seed, 1);
    let mut replay_rng = stream(cfg.seed, 2);
    let mut reset_rng = stream(cfg.seed, 3);

    let mut primary = initial;
    let mut target = primary.clone();
    let mut adam = crate::qnet::Adam::new(primary.parameters().len(), cfg.learning_rate);
    let mut buffer = ReplayBuffer::new(cfg.replay_capacity);
    let mut log = Vec::with_capacity(cfg.iterations());

    let mut state = env.reset(&mut reset_rng)?;
    let mut episode_step = 0;
    let mut env_steps = 0;
    for iteration in 0..cfg.iterations() {
        let epsilon = cfg.epsilon_at(iteration);
        let mut q_sum = 0.0;
        let mut taken = 0;
        for _ in 0..cfg.steps_per_iteration {
            if env_steps == cfg.total_env_interactions {
                break;
            }
            let (a, q) = select_action(&primary, &state, epsilon, &mut explore_rng);
            q_sum += q[a];
            taken += 1;
            let fb = env.step(a)?;
            env_steps += 1;
            episode_step += 1;
            let truncated = fb.truncated || episode_step >= cfg.episode_length;
            buffer.push(Transition { s: state, a, r: fb.reward, s_next: fb.next, truncated });
            if truncated {
                state = env.reset(&mut reset_rng)?;
                episode_step = 0;
            } else {
                state = fb.next;
            }
        }

        let mut loss = None;
        for _ in 0..cfg.updates_per_iteration {
            if buffer.len() < cfg.batch_size {
                break;
            }
            let batch = buffer.sample(cfg.batch_size, &mut replay_rng);
            let targets = td_targets(&primary, &target, &batch, cfg.discount);
            let rows: Vec<TdSample> = batch
                .iter()
                .zip(&targets)
                .map(|(t, &y)| TdSample { features: t.s, action: t.a, target: y })
                .collect();
            let (l, grads) = primary.loss_and_gradient(&rows);
            if !l.is_finite() || grads.iter().any(|g| !g.is_finite()) {
                return Err(AgentError::Diverged { iteration, loss: l });
            }
            adam.step(primary.parameters_mut(), &grads)?;
            loss = Some(l);
        }
        if (iteration + 1) % cfg.target_update_period == 0 {
            soft_update(&primary, &mut target, cfg.tau)?;
        }
        let record = IterationRecord { iteration, env_steps, loss, mean_q: q_sum / taken.max(1) as f64, epsilon };
        on_iteration(&record, &primary);
        log.push(record);
    }
    Ok(TrainOutcome { primary, target, log })
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Seeded generator for network initialisation.
pub fn init_rng(seed: u64) -> ChaCha8Rng {
    stream(seed, 0)
}

/// Mean of `values` over the first and last `fraction` of the sequence.
pub fn window_means(values: &[f64], fraction: f64) -> (f64, f64) {
    let n = ((values.len() as f64 * fraction).ceil() as usize).clamp(1, values.len().max(1));
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len().max(1) as f64;
    (mean(&values[..n.min(values.len())]), mean(&values[values.len().saturating_sub(n)..]))
}

/// Training adapter around the turbine environment: each episode starts
/// from a random admissible state under steady wind.
pub struct TurbineTrainingEnv<'p> {
    pub env: Environment<'p>,
    /// Restrict episodes to this wind speed instead of sampling it.
    pub fixed_wind: Option<f64>,
}

impl<'p> TurbineTrainingEnv<'p> {
    pub fn new(env: Environment<'p>) -> Self {
        Self { env, fixed_wind: None }
    }

    fn encode(&self, s: &EnvState) -> [f64; 3] {
        encode_state(s, &self.env.config().bounds)
    }
}

impl TrainingEnv for TurbineTrainingEnv<'_> {
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Result<[f64; 3], AgentError> {
        let bounds = self.env.config().bounds;
        let r = self.env.plant().blade_radius();
        let s = match self.fixed_wind {
            Some(u) => sample_initial_state_at(rng, u, &bounds, r),
            None => sample_initial_state(rng, &bounds, r),
        };
        self.env.reset_steady(s);
        Ok(self.encode(&self.env.state()))
    }

    fn step(&mut self, action: usize) -> Result<Feedback, AgentError> {
        let action = Action::from_index(action).ok_or_else(|| AgentError::Config(format!("no action {action}")))?;
        let out = self.env.step(action)?;
        Ok(Feedback { reward: out.reward, next: self.encode(&out.next_state), truncated: out.truncated })
    }
}

/// Greedy (ε = 0) rollout of `steps` steps from the environment's current state.
pub fn greedy_rollout<M: QModel>(model: &M, env: &mut Environment, steps: usize) -> Result<Vec<StepOutcome>, AgentError> {
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let features = encode_state(&env.state(), &env.config().bounds);
        let action = Action::ALL[argmax(&model.q_values(&features))];
        let step = env.step(action)?;
        let done = step.truncated;
        out.push(step);
        if done {
            break;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::toy::{LookupTable, ToyMdp};
    use super::*;

    fn table(rows: &[[f64; N_ACTIONS]]) -> LookupTable {
        let mut t = LookupTable::zeros(rows.len());
        for (s, row) in rows.iter().enumerate() {
            for (a, &v) in row.iter().enumerate() {
                t.set(s, a, v);
            }
        }
        t
    }

    fn feat(s: usize) -> [f64; 3] {
        [s as f64, 0.0, 0.0]
    }

    #[test]
    fn greedy_ties_take_lowest_index() {
        let t = table(&[[1.0, 1.0, 0.0, 0.0, 0.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(select_action(&t, &feat(0), 0.0, &mut rng).0, 0);
        assert_eq!(argmax(&[0.0, 2.0, 2.0, -1.0, 2.0]), 1);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let t = table(&[[5.0, 0.0, 0.0, 0.0, 0.0]]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; N_ACTIONS];
        for _ in 0..10_000 {
            counts[select_action(&t, &feat(0), 1.0, &mut rng).0] += 1;
        }
        for c in counts {
            let f = c as f64 / 10_000.0;
            assert!((0.18..=0.22).contains(&f), "{counts:?}");
        }
    }

    #[test]
    fn myopic_targets_are_rewards() {
        let t = table(&[[1.0, 2.0, 3.0, 4.0, 5.0], [9.0; 5]]);
        let batch = [
            Transition { s: feat(0), a: 1, r: 0.25, s_next: feat(1), truncated: false },
            Transition { s: feat(1), a: 4, r: -1.5, s_next: feat(0), truncated: true },
        ];
        assert_eq!(td_targets(&t, &t, &batch, 0.0), vec![0.25, -1.5]);
    }

    #[test]
    fn hand_computed_targets() {
        // primary prefers action 3 at s'=1; target values that column at 0.7
        let primary = table(&[[0.0; 5], [0.1, 0.2, 0.3, 0.9, 0.5]]);
        let target = table(&[[0.0, 0.0, 0.0, 0.0, 2.0], [4.0, 0.0, 0.0, 0.7, 0.0]]);
        let batch = [
            Transition { s: feat(0), a: 0, r: 1.0, s_next: feat(1), truncated: false },
            Transition { s: feat(1), a: 2, r: 0.5, s_next: feat(0), truncated: true },
        ];
        let y = td_targets(&primary, &target, &batch, 0.9);
        assert_eq!(y[0], 1.0 + 0.9 * 0.7);
        // primary is flat at s'=0, so the tie picks action 0 whose target value is 0
        assert_eq!(y[1], 0.5);
    }

    #[test]
    fn double_q_selects_with_primary_and_evaluates_with_target() {
        let primary = table(&[[0.0; 5], [0.0, 0.0, 5.0, 0.0, 0.0]]);
        let target = table(&[[0.0; 5], [10.0, 0.0, 3.0, 0.0, 0.0]]);
        let batch = [Transition { s: feat(0), a: 0, r: 0.0, s_next: feat(1), truncated: false }];
        let y = td_targets(&primary, &target, &batch, 1.0 - 1e-9)[0];
        // the networks disagree on the argmax; the value is the target's entry for the primary's choice
        assert_eq!(argmax(&primary.q_values(&feat(1))), 2);
        assert_eq!(argmax(&target.q_values(&feat(1))), 0);
        assert!((y - 3.0).abs() < 1e-8);
        // with identical networks the rule reduces to the ordinary max target
        let same = td_targets(&target, &target, &batch, 1.0 - 1e-9)[0];
        assert!((same - 10.0).abs() < 1e-7);
    }

    #[test]
    fn soft_update_limits() {
        let p = table(&[[1.0; 5]]);
        let mut t = table(&[[0.0; 5]]);
        soft_update(&p, &mut t, 0.1).unwrap();
        assert!(t.parameters().iter().all(|&v| (v - 0.1).abs() < 1e-15));
        soft_update(&p, &mut t, 1.0).unwrap();
        assert_eq!(t.parameters(), p.parameters());
        let before = t.clone();
        soft_update(&table(&[[7.0; 5]]), &mut t, 0.0).unwrap();
        assert_eq!(t.parameters(), before.parameters());
        let mut wrong = table(&[[0.0; 5], [0.0; 5]]);
        assert!(soft_update(&p, &mut wrong, 0.5).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::paper().validate().is_ok());
        assert!(TrainConfig { discount: 1.0, ..TrainConfig::desk() }.validate().is_err());
        assert!(TrainConfig { tau: 0.0, ..TrainConfig::desk() }.validate().is_err());
        assert!(TrainConfig { epsilon: 1.5, ..TrainConfig::desk() }.validate().is_err());
        assert_eq!(TrainConfig::desk().iterations(), 4000);
    }

    #[test]
    fn toy_training_is_reproducible() {
        let mdp = ToyMdp::standard();
        let cfg = ToyMdp::train_config(7);
        let run = || {
            let mut env = mdp.env();
            train(&mut env, LookupTable::zeros(mdp.n_states()), &TrainConfig { total_env_interactions: 2000, ..cfg }, |_, _| {})
                .unwrap()
        };
        let (a, b) = (run(), run());
        assert_eq!(a.primary.parameters(), b.primary.parameters());
        assert_eq!(a.log, b.log);
    }
}
