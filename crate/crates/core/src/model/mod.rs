//! Linear softmax head over frozen features, its losses and optimizer.

mod checkpoint;
mod loss;
mod optim;

use rand::Rng;
use thiserror::Error;

use crate::rng::{rng_for, tag};

pub use self::checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_FORMAT};
pub use self::loss::{
    cross_entropy, perturb, sentry_loss, sentry_verdict, total_loss, CommitteeConfig, ConsistencyVerdict,
    LabeledExample, UnlabeledExample, Verdict,
};
pub use self::optim::{sgd_step, OptimizerConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("expected {expected} features, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },
    #[error("non-finite gradient: training diverged")]
    NonFiniteGradient,
    #[error("gradient shape does not match the model")]
    ShapeMismatch,
    #[error("invalid optimizer config: {0}")]
    InvalidOptimizer(String),
    #[error("invalid committee config: {0}")]
    InvalidCommittee(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

/// Weights (`C x d`, row-major), bias and their momentum buffers.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelState {
    classes: usize,
    dim: usize,
    weights: Vec<f64>,
    bias: Vec<f64>,
    weight_velocity: Vec<f64>,
    bias_velocity: Vec<f64>,
}

/// Gradient with respect to weights and bias, same layout as [`ModelState`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Gradient {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self {
            weights: vec![0.0; classes * dim],
            bias: vec![0.0; classes],
        }
    }

    /// Adds `scale * dlogits x^T` (and `scale * dlogits` to the bias).
    pub(crate) fn add_outer(&mut self, dlogits: &[f64], x: &[f64], scale: f64) {
        let dim = x.len();
        for (c, &g) in dlogits.iter().enumerate() {
            let g = g * scale;
            self.bias[c] += g;
            for (w, xi) in self.weights[c * dim..(c + 1) * dim].iter_mut().zip(x) {
                *w += g * xi;
            }
        }
    }

    pub(crate) fn add_scaled(&mut self, other: &Gradient, scale: f64) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += scale * b;
        }
        for (a, b) in self.bias.iter_mut().zip(&other.bias) {
            *a += scale * b;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    /// Weights then bias, flattened.
    pub fn to_vec(&self) -> Vec<f64> {
        self.weights.iter().chain(&self.bias).copied().collect()
    }
}

impl ModelState {
    pub fn zeros(classes: usize, dim: usize) -> Self {
        Self::from_parts(classes, dim, vec![0.0; classes * dim], vec![0.0; classes])
            .expect("shapes are consistent by construction")
    }

    /// Xavier-uniform weights, zero bias.
    pub fn xavier(classes: usize, dim: usize, seed: u64) -> Self {
        let bound = (6.0 / (classes + dim) as f64).sqrt();
        let mut rng = rng_for(seed, &[tag::INIT]);
        let weights = (0..classes * dim).map(|_| rng.random_range(-bound..bound)).collect();
        Self::from_parts(classes, dim, weights, vec![0.0; classes]).expect("shapes are consistent by construction")
    }

    pub fn from_parts(classes: usize, dim: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self, ModelError> {
        if weights.len() != classes * dim || bias.len() != classes {
            return Err(ModelError::ShapeMismatch);
        }
        Ok(Self {
            classes,
            dim,
            weight_velocity: vec![0.0; weights.len()],
            bias_velocity: vec![0.0; bias.len()],
            weights,
            bias,
        })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn num_params(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    /// Parameter `i` in the flattened weights-then-bias order.
    pub fn param(&self, i: usize) -> f64 {
        if i < self.weights.len() {
            self.weights[i]
        } else {
            self.bias[i - self.weights.len()]
        }
    }

    pub fn set_param(&mut self, i: usize, v: f64) {
        let nw = self.weights.len();
        if i < nw {
            self.weights[i] = v;
        } else {
            self.bias[i - nw] = v;
        }
    }

    pub fn logits(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        if x.len() != self.dim {
            return Err(ModelError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        Ok(self
            .weights
            .chunks_exact(self.dim)
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + b)
            .collect())
    }

    pub fn predict_proba(&self, x: &[f64]) -> Result<Vec<f64>, ModelError> {
        self.logits(x).map(|z| softmax(&z))
    }

    /// Predicted class (ties to the smaller index).
    pub fn predict(&self, x: &[f64]) -> Result<usize, ModelError> {
        self.logits(x).map(|z| argmax(&z))
    }
}

/// Softmax with max-logit subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// `(argmax, max)` of a probability vector; ties go to the smaller class.
pub fn pseudo_label(probs: &[f64]) -> (usize, f64) {
    let c = argmax(probs);
    (c, probs[c])
}

/// Shannon entropy in nats, with `0 ln 0 = 0`.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs.iter().filter(|&&p| p > 0.0).map(|&p| p * p.ln()).sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_model_is_uniform() {
        let m = ModelState::zeros(4, 3);
        let p = m.predict_proba(&[1.0, -2.0, 0.5]).unwrap();
        assert!(p.iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn softmax_of_ten_and_zero() {
        let p = softmax(&[10.0, 0.0]);
        // 1 / (1 + e^-10)
        let expected = 1.0 / (1.0 + (-10.0f64).exp());
        assert!((p[0] - expected).abs() < 1e-15);
        assert!((p[0] - 0.9999546).abs() < 1e-7);
        assert!((p[1] - 0.0000454).abs() < 1e-7);
    }

    #[test]
    fn huge_logits_stay_valid() {
        let p = softmax(&[1e4, -1e4, 0.0, 1e4]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(p[0], 0.5);
    }

    #[test]
    fn pseudo_labels() {
        assert_eq!(pseudo_label(&[0.1, 0.7, 0.2]), (1, 0.7));
        assert_eq!(pseudo_label(&[0.25; 4]), (0, 0.25));
        assert_eq!(pseudo_label(&[0.0, 0.0, 1.0]), (2, 1.0));
    }

    #[test]
    fn entropy_endpoints() {
        assert!((entropy(&[0.25; 4]) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(entropy(&[0.0, 1.0, 0.0]), 0.0);
        assert!((entropy(&[0.5, 0.5]) - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn dimension_checked() {
        let m = ModelState::zeros(2, 3);
        assert_eq!(
            m.predict_proba(&[1.0]),
            Err(ModelError::DimensionMismatch { expected: 3, found: 1 })
        );
    }

    #[test]
    fn xavier_is_seeded_and_bounded() {
        let a = ModelState::xavier(5, 16, 3);
        assert_eq!(a, ModelState::xavier(5, 16, 3));
        assert_ne!(a, ModelState::xavier(5, 16, 4));
        let bound = (6.0f64 / 21.0).sqrt();
        assert!(a.weights().iter().all(|w| w.abs() <= bound));
        assert!(a.bias().iter().all(|&b| b == 0.0));
    }
}
