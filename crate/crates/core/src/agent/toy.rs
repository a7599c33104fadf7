//! A small deterministic MDP with a tabular Q "network", used to check the
//! training loop against value iteration.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{AgentError, Feedback, QModel, TrainConfig, TrainingEnv, N_ACTIONS};
use crate::qnet::TdSample;

/// Q-table whose input feature 0 carries the state index.
#[derive(Debug, Clone, PartialEq)]
pub struct LookupTable {
    n_states: usize,
    values: Vec<f64>,
}

impl LookupTable {
    pub fn zeros(n_states: usize) -> Self {
        Self { n_states, values: vec![0.0; n_states * N_ACTIONS] }
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.values[s * N_ACTIONS + a]
    }

    pub fn set(&mut self, s: usize, a: usize, v: f64) {
        self.values[s * N_ACTIONS + a] = v;
    }

    fn index(&self, features: &[f64; 3]) -> usize {
        let s = features[0].round();
        assert!(s >= 0.0 && (s as usize) < self.n_states, "state feature {} out of range", features[0]);
        s as usize
    }
}

impl QModel for LookupTable {
    fn q_values(&self, features: &[f64; 3]) -> [f64; N_ACTIONS] {
        let s = self.index(features);
        std::array::from_fn(|a| self.get(s, a))
    }

    fn loss_and_gradient(&self, batch: &[TdSample]) -> (f64, Vec<f64>) {
        let n = batch.len() as f64;
        let mut grads = vec![0.0; self.values.len()];
        let mut loss = 0.0;
        for row in batch {
            let i = self.index(&row.features) * N_ACTIONS + row.action;
            let err = row.target - self.values[i];
            loss += err * err;
            grads[i] += -2.0 * err / n;
        }
        (loss / n, grads)
    }

    fn parameters(&self) -> &[f64] {
        &self.values
    }

    fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
}

/// Deterministic transition and reward tables.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyMdp {
    pub next: Vec<[usize; N_ACTIONS]>,
    pub reward: Vec<[f64; N_ACTIONS]>,
    pub discount: f64,
}

impl ToyMdp {
    /// 12 states on a ring with forward, back, skip, scramble and stay moves.
    pub fn standard() -> Self {
        let n = 12;
        let next = (0..n).map(|s| [(s + 1) % n, (s + n - 1) % n, (s + 3) % n, (5 * s + 1) % n, s]).collect();
        let reward = (0..n)
            .map(|s| std::array::from_fn(|a| ((7 * s + 3 * a) % 11) as f64 / 10.0))
            .collect();
        Self { next, reward, discount: 0.8 }
    }

    pub fn n_states(&self) -> usize {
        self.next.len()
    }

    /// Q* by value iteration to machine precision.
    pub fn optimal_q(&self) -> LookupTable {
        let mut q = LookupTable::zeros(self.n_states());
        loop {
            let v: Vec<f64> =
                (0..self.n_states()).map(|s| (0..N_ACTIONS).map(|a| q.get(s, a)).fold(f64::MIN, f64::max)).collect();
            let mut delta: f64 = 0.0;
            for s in 0..self.n_states() {
                for a in 0..N_ACTIONS {
                    let new = self.reward[s][a] + self.discount * v[self.next[s][a]];
                    delta = delta.max((new - q.get(s, a)).abs());
                    q.set(s, a, new);
                }
            }
            if delta < 1e-13 {
                return q;
            }
        }
    }

    pub fn env(&self) -> ToyEnv<'_> {
        ToyEnv { mdp: self, state: 0 }
    }

    /// Loop settings used for the tabular cross-check.
    pub fn train_config(seed: u64) -> TrainConfig {
        TrainConfig {
            total_env_interactions: 60_000,
            steps_per_iteration: 1,
            updates_per_iteration: 1,
            batch_size: 32,
            learning_rate: 5e-3,
            discount: Self::standard().discount,
            epsilon: 1.0,
            epsilon_final: None,
            tau: 0.1,
            target_update_period: 1,
            episode_length: 10,
            replay_capacity: 5_000,
            seed,
        }
    }
}

pub struct ToyEnv<'m> {
    mdp: &'m ToyMdp,
    state: usize,
}

impl TrainingEnv for ToyEnv<'_> {
    fn reset(&mut self, rng: &mut ChaCha8Rng) -> Result<[f64; 3], AgentError> {
        self.state = rng.random_range(0..self.mdp.n_states());
        Ok([self.state as f64, 0.0, 0.0])
    }

    fn step(&mut self, action: usize) -> Result<Feedback, AgentError> {
        let r = self.mdp.reward[self.state][action];
        self.state = self.mdp.next[self.state][action];
        Ok(Feedback { reward: r, next: [self.state as f64, 0.0, 0.0], truncated: false })
    }
}

/// Largest absolute entry-wise difference.
pub fn max_norm(a: &LookupTable, b: &LookupTable) -> f64 {
    a.values.iter().zip(&b.values).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::train;

    #[test]
    fn value_iteration_satisfies_bellman() {
        let mdp = ToyMdp::standard();
        let q = mdp.optimal_q();
        for s in 0..mdp.n_states() {
            for a in 0..N_ACTIONS {
                let s2 = mdp.next[s][a];
                let v2 = (0..N_ACTIONS).map(|b| q.get(s2, b)).fold(f64::MIN, f64::max);
                assert!((q.get(s, a) - mdp.reward[s][a] - mdp.discount * v2).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn training_loop_recovers_optimal_q() {
        let mdp = ToyMdp::standard();
        let mut env = mdp.env();
        let out = train(&mut env, LookupTable::zeros(mdp.n_states()), &ToyMdp::train_config(3), |_, _| {}).unwrap();
        let err = max_norm(&out.primary, &mdp.optimal_q());
        assert!(err < 1e-2, "max-norm error {err}");
    }
}
