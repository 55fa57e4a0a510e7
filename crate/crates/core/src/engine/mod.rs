//! The round-based adaptation loop.
//!
//! A run warms the head up on source labels plus the consistency loss on
//! target data, then alternates selection rounds (harvest confident
//! pseudo-labels, query the oracle for the most uncertain samples) with
//! training epochs over the resampled target pool.

mod config;
mod metrics;
mod run;
mod train;

use std::collections::HashMap;

use rand::seq::SliceRandom;
use thiserror::Error;

use crate::data::{DataError, Dataset, PoolState};
use crate::gp::GpError;
use crate::model::{ModelError, ModelState};
use crate::rng::{rng_for, tag};

pub use self::config::{EvalSplit, LoopConfig, QueryRule, Strategy};
pub use self::metrics::{parse_metrics_csv, write_metrics_csv, RoundMetrics, METRICS_HEADER};
pub use self::run::{
    run_ada, run_ada_observed, select_round, warm_start, RoundSelection, RoundTrace, RunOutcome, WarmStart,
};
pub use self::train::fit_supervised;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Gp(#[from] GpError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("evaluation split {0} is empty")]
    EmptySplit(&'static str),
    #[error("metrics line {line}: {message}")]
    Metrics { line: usize, message: String },
}

/// Seeded partition of the target records into a held-out evaluation split
/// and the adaptation pool.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSplit {
    pub eval_ids: Vec<u64>,
    pub train_ids: Vec<u64>,
}

impl TargetSplit {
    pub fn new(dataset: &Dataset, eval_fraction: f64, seed: u64) -> Self {
        let mut ids = dataset.target_ids();
        ids.sort_unstable();
        ids.shuffle(&mut rng_for(seed, &[tag::HOLDOUT]));
        let n_eval = (eval_fraction * ids.len() as f64).floor() as usize;
        let mut eval_ids = ids[..n_eval].to_vec();
        let mut train_ids = ids[n_eval..].to_vec();
        eval_ids.sort_unstable();
        train_ids.sort_unstable();
        Self { eval_ids, train_ids }
    }

    pub fn ids(&self, split: EvalSplit) -> Vec<u64> {
        match split {
            EvalSplit::TargetEval => self.eval_ids.clone(),
            EvalSplit::TargetAll => {
                let mut all: Vec<u64> = self.eval_ids.iter().chain(&self.train_ids).copied().collect();
                all.sort_unstable();
                all
            }
        }
    }
}

/// Reveals the true labels of `ids`, spending budget and moving them into
/// the queried set. Fails without side effects on overrun or if an id is
/// not currently unlabeled.
pub fn query_oracle(pool: &mut PoolState, dataset: &Dataset, ids: &[u64]) -> Result<Vec<usize>, EngineError> {
    pool.commit_queries(ids)?;
    Ok(ids
        .iter()
        .map(|id| dataset.get(*id).expect("pool ids come from the dataset").true_label)
        .collect())
}

/// Fraction of `ids` whose argmax prediction equals the true label.
pub fn accuracy(model: &ModelState, dataset: &Dataset, ids: &[u64]) -> Result<f64, EngineError> {
    if ids.is_empty() {
        return Err(EngineError::EmptySplit("(explicit ids)"));
    }
    let mut correct = 0usize;
    for &id in ids {
        let r = dataset.get(id).ok_or(DataError::UnknownId(id))?;
        if model.predict(&r.features)? == r.true_label {
            correct += 1;
        }
    }
    Ok(correct as f64 / ids.len() as f64)
}

/// Accuracy on one target split.
pub fn evaluate(
    model: &ModelState,
    dataset: &Dataset,
    split: EvalSplit,
    holdout: &TargetSplit,
) -> Result<f64, EngineError> {
    let ids = holdout.ids(split);
    if ids.is_empty() {
        return Err(EngineError::EmptySplit(split.as_str()));
    }
    accuracy(model, dataset, &ids)
}

/// Prediction for every id: `(pseudo_label, confidence)`.
pub fn predict_ids(
    model: &ModelState,
    dataset: &Dataset,
    ids: impl IntoIterator<Item = u64>,
) -> Result<HashMap<u64, (usize, f64)>, EngineError> {
    ids.into_iter()
        .map(|id| {
            let x = dataset.features(id)?;
            let p = model.predict_proba(x)?;
            Ok((id, crate::model::pseudo_label(&p)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Domain, FeatureRecord};

    fn balanced() -> Dataset {
        let mut records = Vec::new();
        for c in 0..3usize {
            let mut f = vec![0.0; 3];
            f[c] = 1.0;
            for k in 0..4u64 {
                let domain = if k == 0 { Domain::Source } else { Domain::Target };
                records.push(FeatureRecord {
                    id: c as u64 * 10 + k,
                    domain,
                    true_label: c,
                    features: f.clone(),
                });
            }
        }
        Dataset::new(records, 3).unwrap()
    }

    #[test]
    fn constant_predictor_scores_a_third() {
        let ds = balanced();
        let m = ModelState::from_parts(3, 3, vec![0.0; 9], vec![1.0, 0.0, 0.0]).unwrap();
        let split = TargetSplit::new(&ds, 0.0, 0);
        assert!((evaluate(&m, &ds, EvalSplit::TargetAll, &split).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert!(matches!(
            evaluate(&m, &ds, EvalSplit::TargetEval, &split),
            Err(EngineError::EmptySplit(_))
        ));
    }

    #[test]
    fn exact_head_is_perfect_and_order_free() {
        let ds = balanced();
        let mut w = vec![0.0; 9];
        for c in 0..3 {
            w[c * 3 + c] = 1.0;
        }
        let m = ModelState::from_parts(3, 3, w, vec![0.0; 3]).unwrap();
        let mut ids = ds.target_ids();
        assert_eq!(accuracy(&m, &ds, &ids).unwrap(), 1.0);
        ids.reverse();
        assert_eq!(accuracy(&m, &ds, &ids).unwrap(), 1.0);
    }

    #[test]
    fn oracle_ledger() {
        let ds = balanced();
        let mut pool = PoolState::new(ds.source_ids(), ds.target_ids(), 0.5, 1).unwrap();
        let labels = query_oracle(&mut pool, &ds, &[1, 21]).unwrap();
        assert_eq!(labels, vec![0, 2]);
        assert_eq!(pool.budget_spent(), 2);
        assert!(matches!(
            query_oracle(&mut pool, &ds, &[1]),
            Err(EngineError::Data(DataError::NotUnlabeled(1)))
        ));
        query_oracle(&mut pool, &ds, &[2, 3]).unwrap();
        assert_eq!(pool.budget_spent(), pool.budget_total());
        assert!(matches!(
            query_oracle(&mut pool, &ds, &[13]),
            Err(EngineError::Data(DataError::BudgetOverrun { .. }))
        ));
    }

    #[test]
    fn holdout_is_a_seeded_partition() {
        let ds = balanced();
        let a = TargetSplit::new(&ds, 0.2, 4);
        assert_eq!(a, TargetSplit::new(&ds, 0.2, 4));
        assert_eq!(a.eval_ids.len(), 1);
        assert_eq!(a.ids(EvalSplit::TargetAll), ds.target_ids());
    }
}
