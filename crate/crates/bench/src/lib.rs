//! Fixtures shared by the selection benchmarks.

use std::collections::HashMap;

use gpada::data::{generate_synthetic, Dataset, PoolState, SyntheticSpec};
use gpada::engine::{fit_supervised, predict_ids, LoopConfig};
use gpada::model::ModelState;

/// A pool of `n` unlabeled target samples with every source label known and
/// pseudo-labels from a head fit for one epoch on the source.
pub struct Fixture {
    pub dataset: Dataset,
    pub pool: PoolState,
    pub model: ModelState,
    pub pseudo_labels: HashMap<u64, usize>,
}

impl Fixture {
    pub fn new(n: usize, dim: usize, classes: usize) -> Self {
        let spec = SyntheticSpec {
            num_classes: classes,
            dim,
            per_class_per_domain: n / classes,
            seed: 7,
            ..SyntheticSpec::default()
        };
        let dataset = generate_synthetic(&spec).expect("valid synthetic spec");
        let config = LoopConfig::default();
        let labeled: Vec<(u64, usize)> = dataset
            .source_ids()
            .into_iter()
            .map(|id| (id, dataset.get(id).expect("source id").true_label))
            .collect();
        let model = fit_supervised(&dataset, &labeled, 1, &config.optimizer, 7).expect("source fit");
        let pool = PoolState::new(
            dataset.source_ids(),
            dataset.target_ids(),
            config.budget_fraction,
            config.rounds,
        )
        .expect("pool");
        let pseudo_labels = predict_ids(&model, &dataset, dataset.target_ids())
            .expect("predictions")
            .into_iter()
            .map(|(id, (c, _))| (id, c))
            .collect();
        Self {
            dataset,
            pool,
            model,
            pseudo_labels,
        }
    }
}
