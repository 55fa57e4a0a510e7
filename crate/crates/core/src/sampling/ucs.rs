use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::gp::PosteriorVarianceVector;

pub const DEFAULT_ALPHA: f64 = 0.9;

/// Per-class uncertainty `U^c`, smoothed across epochs by an EMA.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassUncertaintyState {
    pub u: Vec<f64>,
    /// Whether `u[c]` has been observed yet; the first observation seeds it.
    pub observed: Vec<bool>,
    pub alpha: f64,
    pub epoch: usize,
}

impl ClassUncertaintyState {
    pub fn new(classes: usize, alpha: f64) -> Self {
        assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0, 1]");
        Self {
            u: vec![0.0; classes],
            observed: vec![false; classes],
            alpha,
            epoch: 0,
        }
    }

    /// State with every class already observed at `u`.
    pub fn with_values(u: Vec<f64>, alpha: f64) -> Self {
        assert!((0.0..=1.0).contains(&alpha), "alpha must lie in [0, 1]");
        let observed = vec![true; u.len()];
        Self {
            u,
            observed,
            alpha,
            epoch: 0,
        }
    }
}

/// `U_n = alpha U_{n-1} + (1 - alpha) AV_n` per class, where `AV_n` is the
/// mean variance of the samples pseudo-labeled with that class. Classes
/// with no members carry over; a class's first observation sets `U = AV`.
pub fn ucs_update(
    state: &ClassUncertaintyState,
    pv: &PosteriorVarianceVector,
    pseudo_labels: &HashMap<u64, usize>,
) -> ClassUncertaintyState {
    let classes = state.u.len();
    let mut sum = vec![0.0; classes];
    let mut count = vec![0usize; classes];
    for (id, v) in pv.iter() {
        if let Some(&c) = pseudo_labels.get(&id) {
            if c < classes {
                sum[c] += v;
                count[c] += 1;
            }
        }
    }
    let mut next = state.clone();
    for c in 0..classes {
        if count[c] == 0 {
            continue;
        }
        let av = sum[c] / count[c] as f64;
        next.u[c] = if state.observed[c] {
            state.alpha * state.u[c] + (1.0 - state.alpha) * av
        } else {
            av
        };
        next.observed[c] = true;
    }
    next.epoch += 1;
    next
}

/// Draws `|ids|` ids with replacement, each with probability proportional to
/// the uncertainty of its pseudo-class. All-zero weights fall back to
/// uniform.
///
/// Panics if an id has no pseudo-label.
pub fn ucs_resample(
    ids: &[u64],
    pseudo_labels: &HashMap<u64, usize>,
    state: &ClassUncertaintyState,
    seed: u64,
) -> Vec<u64> {
    if ids.is_empty() {
        return Vec::new();
    }
    let weights: Vec<f64> = ids
        .iter()
        .map(|id| {
            let c = *pseudo_labels
                .get(id)
                .unwrap_or_else(|| panic!("id {id} has no pseudo-label"));
            state.u.get(c).copied().unwrap_or(0.0).max(0.0)
        })
        .collect();
    uniform_fallback_draw(ids, &weights, seed)
}

pub(crate) fn uniform_fallback_draw(ids: &[u64], weights: &[f64], seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dist = WeightedIndex::new(weights)
        .or_else(|_| WeightedIndex::new(vec![1.0; ids.len()]))
        .expect("uniform weights over a non-empty list are valid");
    (0..ids.len()).map(|_| ids[dist.sample(&mut rng)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(pairs: &[(u64, f64)]) -> PosteriorVarianceVector {
        PosteriorVarianceVector {
            ids: pairs.iter().map(|p| p.0).collect(),
            pv: pairs.iter().map(|p| p.1).collect(),
        }
    }

    fn labels(pairs: &[(u64, usize)]) -> HashMap<u64, usize> {
        pairs.iter().copied().collect()
    }

    #[test]
    fn ema_endpoints() {
        let pvs = pv(&[(1, 0.7), (2, 0.1)]);
        let pl = labels(&[(1, 0), (2, 1)]);
        let frozen = ucs_update(&ClassUncertaintyState::with_values(vec![0.5, 0.2], 1.0), &pvs, &pl);
        assert_eq!(frozen.u, vec![0.5, 0.2]);
        let memoryless = ucs_update(&ClassUncertaintyState::with_values(vec![0.5, 0.2], 0.0), &pvs, &pl);
        assert_eq!(memoryless.u, vec![0.7, 0.1]);
        assert_eq!(memoryless.epoch, 1);
    }

    #[test]
    fn ema_arithmetic() {
        // 0.9 * 0.5 + 0.1 * 0.7
        let s = ucs_update(
            &ClassUncertaintyState::with_values(vec![0.5], 0.9),
            &pv(&[(1, 0.6), (2, 0.8)]),
            &labels(&[(1, 0), (2, 0)]),
        );
        assert!((s.u[0] - 0.52).abs() < 1e-15);
    }

    #[test]
    fn first_observation_and_carry_forward() {
        let s0 = ClassUncertaintyState::new(3, 0.9);
        let s1 = ucs_update(&s0, &pv(&[(1, 0.4)]), &labels(&[(1, 1)]));
        assert_eq!(s1.u, vec![0.0, 0.4, 0.0]);
        assert_eq!(s1.observed, vec![false, true, false]);
        let s2 = ucs_update(&s1, &pv(&[(3, 0.2)]), &labels(&[(3, 2)]));
        assert_eq!(s2.u, vec![0.0, 0.4, 0.2]);
    }

    #[test]
    fn single_class_resample() {
        let ids = [4, 8, 15];
        let pl = labels(&[(4, 1), (8, 1), (15, 1)]);
        let out = ucs_resample(&ids, &pl, &ClassUncertaintyState::with_values(vec![0.0, 0.3], 0.9), 5);
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|id| ids.contains(id)));
    }

    #[test]
    fn zero_weight_class_is_excluded() {
        let ids: Vec<u64> = (0..20).collect();
        let pl: HashMap<u64, usize> = ids.iter().map(|&i| (i, (i % 2) as usize)).collect();
        let state = ClassUncertaintyState::with_values(vec![0.0, 1.0], 0.9);
        for seed in 0..10 {
            let out = ucs_resample(&ids, &pl, &state, seed);
            assert_eq!(out.len(), 20);
            assert!(out.iter().all(|id| id % 2 == 1));
        }
    }

    #[test]
    fn all_zero_falls_back_to_uniform() {
        let ids: Vec<u64> = (0..50).collect();
        let pl: HashMap<u64, usize> = ids.iter().map(|&i| (i, (i % 2) as usize)).collect();
        let state = ClassUncertaintyState::with_values(vec![0.0, 0.0], 0.9);
        let out = ucs_resample(&ids, &pl, &state, 1);
        assert!(out.iter().any(|id| id % 2 == 0) && out.iter().any(|id| id % 2 == 1));
        assert_eq!(out, ucs_resample(&ids, &pl, &state, 1));
    }
}
