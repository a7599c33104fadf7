//! Dense feed-forward Q-network with ReLU hidden layers and a linear head,
//! trained by backpropagation and Adam.
//!
//! Parameters live in one flat vector, layer by layer: the weight matrix
//! (`out × in`, row-major) followed by the bias vector.

mod adam;
mod persist;

pub use adam::Adam;
pub use persist::{FORMAT_VERSION, MAGIC};

use rand::Rng;

use crate::environment::{EnvState, StateBounds};

/// Layer widths of the Q-network.
pub const ARCHITECTURE: [usize; 4] = [3, 128, 64, 5];

#[derive(Debug, thiserror::Error)]
pub enum QnetError {
    #[error("shape mismatch: expected {expected} parameters, found {found}")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("architecture {found:?} differs from the expected {expected:?}")]
    Architecture { expected: Vec<usize>, found: Vec<usize> },
    #[error("malformed weight file: {0}")]
    Format(String),
    #[error("non-finite parameter at index {0}")]
    NonFinite(usize),
    #[error("cannot access {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// One row of a training batch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdSample {
    pub features: [f64; 3],
    pub action: usize,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
}

fn parameter_count(sizes: &[usize]) -> usize {
    sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum()
}

impl Mlp {
    /// He-uniform weights, zero biases.
    pub fn new(sizes: &[usize], rng: &mut impl Rng) -> Self {
        assert!(sizes.len() >= 2, "need at least an input and an output layer");
        let mut params = Vec::with_capacity(parameter_count(sizes));
        for w in sizes.windows(2) {
            let limit = (6.0 / w[0] as f64).sqrt();
            params.extend((0..w[0] * w[1]).map(|_| rng.random_range(-limit..limit)));
            params.extend(std::iter::repeat_n(0.0, w[1]));
        }
        Self { sizes: sizes.to_vec(), params }
    }

    /// The 3 → 128 → 64 → 5 Q-network.
    pub fn q_network(rng: &mut impl Rng) -> Self {
        Self::new(&ARCHITECTURE, rng)
    }

    pub fn zeros(sizes: &[usize]) -> Self {
        Self { sizes: sizes.to_vec(), params: vec![0.0; parameter_count(sizes)] }
    }

    pub fn from_parameters(sizes: &[usize], params: Vec<f64>) -> Result<Self, QnetError> {
        let expected = parameter_count(sizes);
        if params.len() != expected {
            return Err(QnetError::ShapeMismatch { expected, found: params.len() });
        }
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(QnetError::NonFinite(i));
        }
        Ok(Self { sizes: sizes.to_vec(), params })
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn parameters(&self) -> &[f64] {
        &self.params
    }

    pub fn parameters_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn layer_count(&self) -> usize {
        self.sizes.len() - 1
    }

    /// Offset of layer `l`'s weights in the flat vector.
    fn offset(&self, l: usize) -> usize {
        parameter_count(&self.sizes[..=l])
    }

    /// Mutable (weights, biases) of layer `l`.
    pub fn layer_mut(&mut self, l: usize) -> (&mut [f64], &mut [f64]) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offset(l);
        let (w, rest) = self.params[start..].split_at_mut(n_in * n_out);
        (w, &mut rest[..n_out])
    }

    fn layer(&self, l: usize) -> (&[f64], &[f64]) {
        let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
        let start = self.offset(l);
        let w = &self.params[start..start + n_in * n_out];
        (w, &self.params[start + n_in * n_out..start + n_in * n_out + n_out])
    }

    /// Activations of every layer, input first; hidden layers post-ReLU.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(input.len(), self.sizes[0], "input width");
        let mut acts = Vec::with_capacity(self.sizes.len());
        acts.push(input.to_vec());
        for l in 0..self.layer_count() {
            let (w, b) = self.layer(l);
            let x = &acts[l];
            let last = l + 1 == self.layer_count();
            let out: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(j, &bj)| {
                    let z = bj + w[j * x.len()..(j + 1) * x.len()].iter().zip(x).map(|(wi, xi)| wi * xi).sum::<f64>();
                    if last {
                        z
                    } else {
                        z.max(0.0)
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.activations(input).pop().expect("at least one layer")
    }

    /// Mean squared TD error over the batch and its gradient. Only the taken
    /// action's output unit receives error.
    pub fn backward(&self, batch: &[TdSample]) -> (f64, Vec<f64>) {
        assert!(!batch.is_empty(), "empty batch");
        let n = batch.len() as f64;
        let mut grads = vec![0.0; self.params.len()];
        let mut loss = 0.0;
        let out_width = *self.sizes.last().unwrap();
        for row in batch {
            assert!(row.action < out_width, "action index out of range");
            let acts = self.activations(&row.features);
            let q = acts.last().unwrap()[row.action];
            let err = row.target - q;
            loss += err * err;
            let mut delta = vec![0.0; out_width];
            delta[row.action] = -2.0 * err / n;
            for l in (0..self.layer_count()).rev() {
                let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
                let start = self.offset(l);
                let x = &acts[l];
                for j in 0..n_out {
                    let d = delta[j];
                    if d == 0.0 {
                        continue;
                    }
                    let gw = &mut grads[start + j * n_in..start + (j + 1) * n_in];
                    for (g, xi) in gw.iter_mut().zip(x) {
                        *g += d * xi;
                    }
                    grads[start + n_in * n_out + j] += d;
                }
                if l > 0 {
                    let (w, _) = self.layer(l);
                    let mut prev = vec![0.0; n_in];
                    for j in 0..n_out {
                        let d = delta[j];
                        if d == 0.0 {
                            continue;
                        }
                        for (p, wi) in prev.iter_mut().zip(&w[j * n_in..(j + 1) * n_in]) {
                            *p += d * wi;
                        }
                    }
                    // ReLU derivative from the stored post-activation
                    for (p, a) in prev.iter_mut().zip(x) {
                        if *a <= 0.0 {
                            *p = 0.0;
                        }
                    }
                    delta = prev;
                }
            }
        }
        (loss / n, grads)
    }

    /// Mean squared TD error without gradients.
    pub fn loss(&self, batch: &[TdSample]) -> f64 {
        batch.iter().map(|r| (r.target - self.forward(&r.features)[r.action]).powi(2)).sum::<f64>() / batch.len() as f64
    }
}

/// Affine map of each state component from its bound interval to [-1, 1].
pub fn encode_state(s: &EnvState, bounds: &StateBounds) -> [f64; 3] {
    let scale = |v: f64, (lo, hi): (f64, f64)| 2.0 * (v - lo) / (hi - lo) - 1.0;
    [scale(s.wind_speed, bounds.wind), scale(s.rotor_speed, bounds.rotor), scale(s.pitch, bounds.pitch)]
}
