//! Sample selection: confident harvesting, posterior-variance querying,
//! uncertainty-balanced resampling and the random/entropy baselines.
//!
//! Ties on confidence, variance or entropy always break toward the smaller
//! id so that runs are bit-reproducible.

mod baselines;
mod plcs;
mod ucs;

use std::cmp::Ordering;

pub use self::baselines::{entropy_select, random_select};
pub use self::plcs::{plcs_select, Confident, ConfidentSelection};
pub use self::ucs::{ucs_resample, ucs_update, ClassUncertaintyState, DEFAULT_ALPHA};

use crate::gp::PosteriorVarianceVector;

/// Ids chosen for annotation, highest score first.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuerySelection {
    pub ids: Vec<u64>,
    /// Scores aligned with `ids`, non-increasing.
    pub scores: Vec<f64>,
}

/// Descending by score, then ascending by id.
pub(crate) fn score_order(a: &(u64, f64), b: &(u64, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// The `min(b, n)` highest-scoring ids.
pub fn top_by_score(mut scored: Vec<(u64, f64)>, b: usize) -> QuerySelection {
    scored.sort_by(score_order);
    scored.truncate(b);
    let (ids, scores) = scored.into_iter().unzip();
    QuerySelection { ids, scores }
}

/// The `min(b, |pv|)` samples with the largest posterior variance.
pub fn gpas_select(pv: &PosteriorVarianceVector, b: usize) -> QuerySelection {
    top_by_score(pv.iter().collect(), b)
}
