use std::collections::HashMap;

use rand::seq::SliceRandom;

use super::{predict_ids, EngineError, LoopConfig};
use crate::data::{Dataset, PoolState};
use crate::gp::class_wise_variances;
use crate::model::{
    perturb, sentry_verdict, sgd_step, total_loss, CommitteeConfig, LabeledExample, ModelState, OptimizerConfig,
    UnlabeledExample,
};
use crate::rng::{derive_seed, rng_for, tag};
use crate::sampling::{ucs_resample, ucs_update, ClassUncertaintyState};

pub(crate) struct Trainer<'a> {
    pub dataset: &'a Dataset,
    pub config: &'a LoopConfig,
    pub committee: CommitteeConfig,
    pub epoch: u64,
}

/// Labeled training pairs: source (true labels), queried target (revealed
/// labels), harvested target (stored pseudo-labels).
fn labeled_pairs(pool: &PoolState, dataset: &Dataset) -> Vec<(u64, usize)> {
    let truth = |id: u64| dataset.get(id).expect("pool ids come from the dataset").true_label;
    pool.source_ids()
        .iter()
        .map(|&id| (id, truth(id)))
        .chain(pool.queried_ids().iter().map(|&id| (id, truth(id))))
        .chain(pool.plcs_labels().iter().map(|(&id, &l)| (id, l)))
        .collect()
}

impl<'a> Trainer<'a> {
    pub fn new(dataset: &'a Dataset, config: &'a LoopConfig) -> Self {
        Self {
            dataset,
            config,
            committee: config.committee(dataset),
            epoch: 0,
        }
    }

    /// The epoch's target list: the unlabeled pool resampled with
    /// replacement, weighted by class uncertainty when UCS is on and
    /// uniformly otherwise (and always during warm-up).
    fn target_list(
        &self,
        model: &ModelState,
        pool: &PoolState,
        ucs: Option<&mut ClassUncertaintyState>,
    ) -> Result<Vec<u64>, EngineError> {
        let unlabeled: Vec<u64> = pool.unlabeled_ids().iter().copied().collect();
        if unlabeled.is_empty() {
            return Ok(unlabeled);
        }
        let seed = derive_seed(self.config.seed, &[tag::RESAMPLE, self.epoch]);
        let pseudo: HashMap<u64, usize> = predict_ids(model, self.dataset, unlabeled.iter().copied())?
            .into_iter()
            .map(|(id, (c, _))| (id, c))
            .collect();
        if let Some(ucs) = ucs.filter(|_| self.config.strategy.uses_ucs()) {
            let pv = class_wise_variances(pool, self.dataset, &pseudo, self.config.jitter)?;
            *ucs = ucs_update(ucs, &pv, &pseudo);
            Ok(ucs_resample(&unlabeled, &pseudo, ucs, seed))
        } else {
            let flat = ClassUncertaintyState::with_values(vec![1.0; self.dataset.num_classes()], 0.0);
            Ok(ucs_resample(&unlabeled, &pseudo, &flat, seed))
        }
    }

    /// One pass over the labeled data in mini-batches, each paired with a
    /// batch of the resampled target list. Returns the mean batch loss.
    /// `ucs` is `None` during warm-up.
    pub fn epoch(
        &mut self,
        mut model: ModelState,
        pool: &PoolState,
        ucs: Option<&mut ClassUncertaintyState>,
    ) -> Result<(ModelState, f64), EngineError> {
        let targets = self.target_list(&model, pool, ucs)?;
        let mut labeled = labeled_pairs(pool, self.dataset);
        labeled.shuffle(&mut rng_for(self.config.seed, &[tag::SHUFFLE, self.epoch]));

        let batch = self.config.optimizer.batch_size;
        let steps = labeled.len().div_ceil(batch).max(1);
        let mut loss_sum = 0.0;
        for step in 0..steps {
            let lb: Vec<LabeledExample<'_>> = labeled
                .iter()
                .skip(step * batch)
                .take(batch)
                .map(|&(id, label)| LabeledExample {
                    features: self.dataset.features(id).expect("pool ids come from the dataset"),
                    label,
                })
                .collect();

            let mut perturbed = Vec::new();
            let mut verdicts = Vec::new();
            if !targets.is_empty() && self.config.lambda > 0.0 {
                for j in 0..batch {
                    let slot = step * batch + j;
                    let id = targets[slot % targets.len()];
                    let x = self.dataset.features(id)?;
                    let seed = derive_seed(self.config.seed, &[tag::COMMITTEE, self.epoch, slot as u64]);
                    let v = sentry_verdict(&model, id, x, &self.committee, seed)?;
                    verdicts.push(v.verdict);
                    perturbed.push(perturb(x, self.committee.sigma, seed, self.committee.size as u64));
                }
            }
            let ub: Vec<UnlabeledExample<'_>> = perturbed
                .iter()
                .zip(&verdicts)
                .map(|(x, &verdict)| UnlabeledExample { features: x, verdict })
                .collect();

            let (loss, grad) = total_loss(&model, &lb, &ub, self.config.lambda)?;
            model = sgd_step(model, &grad, &self.config.optimizer)?;
            loss_sum += loss;
        }
        self.epoch += 1;
        Ok((model, loss_sum / steps as f64))
    }
}

/// Plain supervised training of a fresh head on `labeled` for `epochs`
/// passes: shuffled mini-batches, cross-entropy only.
pub fn fit_supervised(
    dataset: &Dataset,
    labeled: &[(u64, usize)],
    epochs: usize,
    optimizer: &OptimizerConfig,
    seed: u64,
) -> Result<ModelState, EngineError> {
    optimizer.validate()?;
    let mut model = ModelState::xavier(dataset.num_classes(), dataset.dim(), seed);
    let mut order = labeled.to_vec();
    for epoch in 0..epochs as u64 {
        order.shuffle(&mut rng_for(seed, &[tag::SHUFFLE, epoch]));
        for chunk in order.chunks(optimizer.batch_size) {
            let lb = chunk
                .iter()
                .map(|&(id, label)| {
                    Ok(LabeledExample {
                        features: dataset.features(id)?,
                        label,
                    })
                })
                .collect::<Result<Vec<_>, EngineError>>()?;
            let (_, grad) = total_loss(&model, &lb, &[], 0.0)?;
            model = sgd_step(model, &grad, optimizer)?;
        }
    }
    Ok(model)
}
