use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::data::{Dataset, PoolState};

/// Stacked feature rows with the ids they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureBlock {
    pub ids: Vec<u64>,
    pub features: DMatrix<f64>,
}

impl FeatureBlock {
    pub fn from_ids(dataset: &Dataset, ids: Vec<u64>) -> Self {
        let dim = dataset.dim();
        let mut features = DMatrix::zeros(ids.len(), dim);
        for (row, id) in ids.iter().enumerate() {
            let f = dataset
                .get(*id)
                .unwrap_or_else(|| panic!("id {id} is not part of the dataset"));
            for (j, v) in f.features.iter().enumerate() {
                features[(row, j)] = *v;
            }
        }
        Self { ids, features }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Labeled and unlabeled features of one class.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSplit {
    pub class_id: usize,
    pub labeled: FeatureBlock,
    pub unlabeled: FeatureBlock,
}

/// Splits the pool class-wise. Labeled rows are source samples (true
/// labels), then queried target samples (revealed labels), then harvested
/// samples (stored pseudo-labels). Unlabeled rows are grouped by
/// `pseudo_labels` and ordered by id.
///
/// Panics if an unlabeled id has no pseudo-label.
pub fn class_partition(pool: &PoolState, dataset: &Dataset, pseudo_labels: &HashMap<u64, usize>) -> Vec<ClassSplit> {
    let classes = dataset.num_classes();
    let mut labeled: Vec<Vec<u64>> = vec![Vec::new(); classes];
    let mut unlabeled: Vec<Vec<u64>> = vec![Vec::new(); classes];

    let true_label = |id: u64| {
        dataset
            .get(id)
            .unwrap_or_else(|| panic!("id {id} is not part of the dataset"))
            .true_label
    };
    for &id in pool.source_ids() {
        labeled[true_label(id)].push(id);
    }
    for &id in pool.queried_ids() {
        labeled[true_label(id)].push(id);
    }
    for (&id, &label) in pool.plcs_labels() {
        labeled[label].push(id);
    }
    for &id in pool.unlabeled_ids() {
        let c = *pseudo_labels
            .get(&id)
            .unwrap_or_else(|| panic!("unlabeled id {id} has no pseudo-label"));
        unlabeled[c].push(id);
    }

    labeled
        .into_iter()
        .zip(unlabeled)
        .enumerate()
        .map(|(class_id, (l, u))| ClassSplit {
            class_id,
            labeled: FeatureBlock::from_ids(dataset, l),
            unlabeled: FeatureBlock::from_ids(dataset, u),
        })
        .collect()
}
