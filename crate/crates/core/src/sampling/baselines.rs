use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{top_by_score, QuerySelection};

/// `min(b, n)` distinct candidates drawn uniformly at random. Scores are 0.
pub fn random_select(candidates: &[u64], b: usize, seed: u64) -> QuerySelection {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<u64> = candidates
        .choose_multiple(&mut rng, b.min(candidates.len()))
        .copied()
        .collect();
    let scores = vec![0.0; ids.len()];
    QuerySelection { ids, scores }
}

/// The `b` candidates with the highest predictive entropy.
pub fn entropy_select(entropies: &[(u64, f64)], b: usize) -> QuerySelection {
    top_by_score(entropies.to_vec(), b)
}
