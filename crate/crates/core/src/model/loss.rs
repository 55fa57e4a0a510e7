use rand::Rng;
use rand_distr::StandardNormal;

use super::{softmax, Gradient, ModelError, ModelState};
use crate::rng::rng_for;

#[derive(Debug, Clone, Copy)]
pub struct LabeledExample<'a> {
    pub features: &'a [f64],
    pub label: usize,
}

/// An unlabeled sample already perturbed, with its committee verdict.
#[derive(Debug, Clone, Copy)]
pub struct UnlabeledExample<'a> {
    pub features: &'a [f64],
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Inconsistent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyVerdict {
    pub id: u64,
    pub verdict: Verdict,
    pub clean_prediction: usize,
    pub committee_votes: Vec<usize>,
}

/// Feature-space perturbation committee standing in for image augmentations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommitteeConfig {
    /// Number of perturbed copies; odd.
    pub size: usize,
    /// Per-coordinate standard deviation of the Gaussian perturbation.
    pub sigma: f64,
}

impl CommitteeConfig {
    pub const DEFAULT_SIZE: usize = 3;

    /// `0.1 * mean_norm / sqrt(dim)`.
    pub fn auto_sigma(mean_norm: f64, dim: usize) -> f64 {
        0.1 * mean_norm / (dim as f64).sqrt()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.size == 0 || self.size.is_multiple_of(2) {
            return Err(ModelError::InvalidCommittee(format!(
                "committee size must be odd and positive, got {}",
                self.size
            )));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(ModelError::InvalidCommittee(format!(
                "sigma must be non-negative, got {}",
                self.sigma
            )));
        }
        Ok(())
    }
}

/// `x + sigma * N(0, I)` drawn from the stream `(seed, index)`.
pub fn perturb(x: &[f64], sigma: f64, seed: u64, index: u64) -> Vec<f64> {
    if sigma == 0.0 {
        return x.to_vec();
    }
    let mut rng = rng_for(seed, &[index]);
    x.iter()
        .map(|v| v + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Votes `committee.size` perturbed predictions against the clean one. The
/// sample is consistent iff a strict majority agrees.
pub fn sentry_verdict(
    model: &ModelState,
    id: u64,
    x: &[f64],
    committee: &CommitteeConfig,
    seed: u64,
) -> Result<ConsistencyVerdict, ModelError> {
    let clean = model.predict(x)?;
    let votes = (0..committee.size as u64)
        .map(|i| model.predict(&perturb(x, committee.sigma, seed, i)))
        .collect::<Result<Vec<_>, _>>()?;
    let agree = votes.iter().filter(|&&v| v == clean).count();
    let verdict = if 2 * agree > votes.len() {
        Verdict::Consistent
    } else {
        Verdict::Inconsistent
    };
    Ok(ConsistencyVerdict {
        id,
        verdict,
        clean_prediction: clean,
        committee_votes: votes,
    })
}

fn log_softmax(z: &[f64]) -> Vec<f64> {
    let max = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + z.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    z.iter().map(|v| v - lse).collect()
}

/// `-ln p(label | x)` and its gradient.
pub fn cross_entropy(model: &ModelState, x: &[f64], label: usize) -> Result<(f64, Gradient), ModelError> {
    if label >= model.classes() {
        return Err(ModelError::LabelOutOfRange {
            label,
            classes: model.classes(),
        });
    }
    let z = model.logits(x)?;
    let logp = log_softmax(&z);
    let mut dz = softmax(&z);
    dz[label] -= 1.0;
    let mut grad = Gradient::zeros(model.classes(), model.dim());
    grad.add_outer(&dz, x, 1.0);
    Ok((-logp[label], grad))
}

/// `+H(y | x~)` for consistent samples, `-H(y | x~)` for inconsistent ones.
/// `x_tilde` is the perturbed input.
pub fn sentry_loss(model: &ModelState, x_tilde: &[f64], verdict: Verdict) -> Result<(f64, Gradient), ModelError> {
    let z = model.logits(x_tilde)?;
    let logp = log_softmax(&z);
    let p: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
    let h = -p.iter().zip(&logp).map(|(p, l)| p * l).sum::<f64>();
    // dH/dz_j = -p_j (ln p_j + H)
    let dh: Vec<f64> = p.iter().zip(&logp).map(|(p, l)| -p * (l + h)).collect();
    let sign = match verdict {
        Verdict::Consistent => 1.0,
        Verdict::Inconsistent => -1.0,
    };
    let mut grad = Gradient::zeros(model.classes(), model.dim());
    grad.add_outer(&dh, x_tilde, sign);
    Ok((sign * h, grad))
}

/// Mean cross-entropy over `labeled` plus `lambda` times the mean
/// consistency loss over `unlabeled`. An empty batch contributes zero.
pub fn total_loss(
    model: &ModelState,
    labeled: &[LabeledExample<'_>],
    unlabeled: &[UnlabeledExample<'_>],
    lambda: f64,
) -> Result<(f64, Gradient), ModelError> {
    let mut grad = Gradient::zeros(model.classes(), model.dim());
    let mut loss = 0.0;
    if !labeled.is_empty() {
        let scale = 1.0 / labeled.len() as f64;
        for ex in labeled {
            let (l, g) = cross_entropy(model, ex.features, ex.label)?;
            loss += scale * l;
            grad.add_scaled(&g, scale);
        }
    }
    if !unlabeled.is_empty() && lambda != 0.0 {
        let scale = lambda / unlabeled.len() as f64;
        for ex in unlabeled {
            let (l, g) = sentry_loss(model, ex.features, ex.verdict)?;
            loss += scale * l;
            grad.add_scaled(&g, scale);
        }
    }
    Ok((loss, grad))
}
