//! Class-wise Gaussian-process posteriors under the normalized linear kernel.
//!
//! For class `c`, labeled rows are every labeled sample with label `c` and
//! unlabeled rows are the unlabeled target samples pseudo-labeled `c`. Each
//! class is conditioned independently and the clamped posterior variances
//! are concatenated in class order.

mod kernel;
mod partition;
mod posterior;

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;
use thiserror::Error;

use crate::data::{Dataset, PoolState};

pub use self::kernel::{cosine_kernel, normalize_rows, KernelMatrix, KERNEL_TOL};
pub use self::partition::{class_partition, ClassSplit, FeatureBlock};
pub use self::posterior::{
    class_posterior, class_variance, gp_posterior, posterior_variance, ClassGpPosterior, ClassVariance, Posterior,
    DEFAULT_JITTER, MAX_JITTER,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GpError {
    #[error("feature dimensionality mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("row {row} has zero or non-finite norm")]
    ZeroNorm { row: usize },
    #[error("jitter must be positive and finite, got {0}")]
    InvalidJitter(f64),
    #[error("posterior needs at least one labeled sample")]
    EmptyConditioning,
    #[error("labeled kernel of class {} is not positive definite even with jitter {max_jitter}", fmt_class(.class))]
    NotPositiveDefinite { class: Option<usize>, max_jitter: f64 },
    #[error("sample {0} appears in more than one class")]
    DuplicateId(u64),
}

fn fmt_class(c: &Option<usize>) -> String {
    c.map_or_else(|| "?".to_string(), |c| c.to_string())
}

impl GpError {
    fn in_class(self, class_id: usize) -> Self {
        match self {
            GpError::NotPositiveDefinite { max_jitter, .. } => GpError::NotPositiveDefinite {
                class: Some(class_id),
                max_jitter,
            },
            other => other,
        }
    }
}

/// Posterior variances of all unlabeled samples, concatenated by class.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PosteriorVarianceVector {
    pub ids: Vec<u64>,
    pub pv: Vec<f64>,
}

impl PosteriorVarianceVector {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn mean(&self) -> f64 {
        if self.pv.is_empty() {
            0.0
        } else {
            self.pv.iter().sum::<f64>() / self.pv.len() as f64
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.ids.iter().copied().zip(self.pv.iter().copied())
    }
}

/// Concatenates per-class variances in ascending class order.
pub fn assemble_pv(mut parts: Vec<ClassVariance>) -> Result<PosteriorVarianceVector, GpError> {
    parts.sort_by_key(|p| p.class_id);
    let mut seen = HashSet::new();
    let mut out = PosteriorVarianceVector::default();
    for part in parts {
        for (&id, &v) in part.ids.iter().zip(&part.pv) {
            if !seen.insert(id) {
                return Err(GpError::DuplicateId(id));
            }
            out.ids.push(id);
            out.pv.push(v);
        }
    }
    Ok(out)
}

/// Partitions the pool, conditions every class in parallel and assembles
/// the variance vector. The result does not depend on the worker count.
pub fn class_wise_variances(
    pool: &PoolState,
    dataset: &Dataset,
    pseudo_labels: &HashMap<u64, usize>,
    jitter: f64,
) -> Result<PosteriorVarianceVector, GpError> {
    let splits = class_partition(pool, dataset, pseudo_labels);
    let parts = splits
        .par_iter()
        .map(|s| class_variance(s, jitter))
        .collect::<Result<Vec<_>, _>>()?;
    assemble_pv(parts)
}

/// Full class-wise posteriors, in class order.
pub fn class_wise_posteriors(
    pool: &PoolState,
    dataset: &Dataset,
    pseudo_labels: &HashMap<u64, usize>,
    jitter: f64,
) -> Result<Vec<ClassGpPosterior>, GpError> {
    class_partition(pool, dataset, pseudo_labels)
        .par_iter()
        .map(|s| class_posterior(s, jitter))
        .collect()
}
