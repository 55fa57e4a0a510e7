use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use super::train::Trainer;
use super::{evaluate, predict_ids, query_oracle, EngineError, LoopConfig, QueryRule, RoundMetrics, TargetSplit};
use crate::data::{Dataset, PoolState};
use crate::gp::{class_wise_variances, PosteriorVarianceVector};
use crate::model::ModelState;
use crate::rng::{derive_seed, tag};
use crate::sampling::{entropy_select, gpas_select, plcs_select, random_select, ClassUncertaintyState, QuerySelection};

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub metrics: Vec<RoundMetrics>,
    pub model: ModelState,
    pub pool: PoolState,
    pub holdout: TargetSplit,
    /// Accuracy on the configured split right after warm-up.
    pub warmup_accuracy: f64,
    /// kappa used in each round (also for strategies that skip harvesting).
    pub kappa_schedule: Vec<f64>,
}

/// What happened in one round, handed to the observer of
/// [`run_ada_observed`] after the round's training epochs.
#[derive(Debug)]
pub struct RoundTrace<'a> {
    pub round: usize,
    pub kappa: f64,
    /// PLCS picks of this round with their pseudo-labels.
    pub harvested: Vec<(u64, usize)>,
    /// Unlabeled ids the query rule ranked.
    pub candidates: Vec<u64>,
    pub queried: Vec<u64>,
    pub pool: &'a PoolState,
    pub model: &'a ModelState,
}

/// State right after warm-up.
#[derive(Debug, Clone)]
pub struct WarmStart {
    pub model: ModelState,
    pub pool: PoolState,
    pub holdout: TargetSplit,
}

/// Outcome of the selection half of a round. The pool already reflects the
/// harvest; the queries are not committed yet.
#[derive(Debug, Clone)]
pub struct RoundSelection {
    pub kappa: f64,
    pub harvested: Vec<(u64, usize)>,
    pub candidates: Vec<u64>,
    pub queries: QuerySelection,
    /// Pseudo-labels of the candidates.
    pub pseudo_labels: HashMap<u64, usize>,
    /// Present when the query rule needed the GP.
    pub variances: Option<PosteriorVarianceVector>,
}

/// Holds out the evaluation split, builds the pool and runs the warm-up
/// epochs (cross-entropy on source plus the consistency loss on target).
pub fn warm_start(config: &LoopConfig, dataset: &Dataset) -> Result<WarmStart, EngineError> {
    let mut trainer = Trainer::new(dataset, config);
    warm_start_with(config, dataset, &mut trainer)
}

fn warm_start_with(
    config: &LoopConfig,
    dataset: &Dataset,
    trainer: &mut Trainer<'_>,
) -> Result<WarmStart, EngineError> {
    config.validate()?;
    let holdout = TargetSplit::new(dataset, config.eval_fraction, config.seed);
    let pool = PoolState::new(
        dataset.source_ids(),
        holdout.train_ids.clone(),
        config.budget_fraction,
        config.rounds,
    )?;
    let mut model = ModelState::xavier(dataset.num_classes(), dataset.dim(), config.seed);
    for _ in 0..config.warmup_epochs {
        model = trainer.epoch(model, &pool, None)?.0;
    }
    Ok(WarmStart { model, pool, holdout })
}

/// Pseudo-labels the pool, harvests confident samples (PLCS strategies),
/// and ranks the remaining unlabeled samples with the strategy's query rule.
///
/// `budget` is capped by what the ledger has left.
pub fn select_round(
    config: &LoopConfig,
    dataset: &Dataset,
    model: &ModelState,
    pool: &mut PoolState,
    round: usize,
    budget: usize,
) -> Result<RoundSelection, EngineError> {
    let kappa = config.kappa_at(round);
    // Pseudo-labels over the whole adaptation pool; harvested samples
    // follow the current model.
    let preds = predict_ids(model, dataset, pool.target_ids())?;
    pool.refresh_plcs_labels(|id| preds.get(&id).map(|p| p.0));

    let mut harvested = Vec::new();
    if config.strategy.uses_plcs() && kappa > 0.0 {
        let mut base_counts = vec![0usize; dataset.num_classes()];
        for (label, _) in preds.values() {
            base_counts[*label] += 1;
        }
        let confidences: BTreeMap<u64, (usize, f64)> = pool.unlabeled_ids().iter().map(|id| (*id, preds[id])).collect();
        harvested = plcs_select(&confidences, kappa, &base_counts).picks();
        pool.harvest(&harvested)?;
    }

    // The model has not changed since the harvest, so these are the
    // refreshed pseudo-labels of the remaining pool.
    let pseudo_labels: HashMap<u64, usize> = pool.unlabeled_ids().iter().map(|id| (*id, preds[id].0)).collect();
    let candidates: Vec<u64> = pool.unlabeled_ids().iter().copied().collect();
    let budget = budget.min(pool.budget_remaining());
    let mut variances = None;
    let queries = match config.strategy.query_rule() {
        QueryRule::Gpas => {
            let pv = class_wise_variances(pool, dataset, &pseudo_labels, config.jitter)?;
            let s = gpas_select(&pv, budget);
            variances = Some(pv);
            s
        }
        QueryRule::Random => random_select(
            &candidates,
            budget,
            derive_seed(config.seed, &[tag::RANDOM_QUERY, round as u64]),
        ),
        QueryRule::Entropy => {
            let scored: Vec<(u64, f64)> = candidates
                .iter()
                .map(|&id| {
                    let p = model.predict_proba(dataset.features(id)?)?;
                    Ok((id, crate::model::entropy(&p)))
                })
                .collect::<Result<_, EngineError>>()?;
            entropy_select(&scored, budget)
        }
    };
    Ok(RoundSelection {
        kappa,
        harvested,
        candidates,
        queries,
        pseudo_labels,
        variances,
    })
}

/// Runs warm-up followed by `config.rounds` selection rounds.
///
/// Each round refreshes pseudo-labels, harvests the top-kappa% confident
/// samples per pseudo-class (PLCS strategies only), ranks the remaining
/// unlabeled samples by the configured query rule, queries the oracle for the
/// round budget and trains `epochs_per_round` epochs.
pub fn run_ada(config: &LoopConfig, dataset: &Dataset) -> Result<RunOutcome, EngineError> {
    run_ada_observed(config, dataset, |_| {})
}

/// [`run_ada`] with a callback invoked at the end of every round.
pub fn run_ada_observed(
    config: &LoopConfig,
    dataset: &Dataset,
    mut observe: impl FnMut(&RoundTrace<'_>),
) -> Result<RunOutcome, EngineError> {
    let mut trainer = Trainer::new(dataset, config);
    let WarmStart {
        mut model,
        mut pool,
        holdout,
    } = warm_start_with(config, dataset, &mut trainer)?;
    let warmup_accuracy = evaluate(&model, dataset, config.eval_split, &holdout)?;
    let mut ucs = ClassUncertaintyState::new(dataset.num_classes(), config.alpha);

    let mut metrics = Vec::with_capacity(config.rounds);
    let mut kappa_schedule = Vec::with_capacity(config.rounds);
    for round in 1..=config.rounds {
        let started = Instant::now();
        let budget = pool.round_budget(round);
        let sel = select_round(config, dataset, &model, &mut pool, round, budget)?;
        let selection_ms = started.elapsed().as_secs_f64() * 1e3;
        kappa_schedule.push(sel.kappa);
        let mean_pv = match &sel.variances {
            Some(pv) => pv.mean(),
            None => class_wise_variances(&pool, dataset, &sel.pseudo_labels, config.jitter)?.mean(),
        };
        query_oracle(&mut pool, dataset, &sel.queries.ids)?;

        let mut train_loss = 0.0;
        for _ in 0..config.epochs_per_round {
            let (m, loss) = trainer.epoch(model, &pool, Some(&mut ucs))?;
            model = m;
            train_loss = loss;
        }
        observe(&RoundTrace {
            round,
            kappa: sel.kappa,
            harvested: sel.harvested.clone(),
            candidates: sel.candidates,
            queried: sel.queries.ids.clone(),
            pool: &pool,
            model: &model,
        });
        metrics.push(RoundMetrics {
            round,
            queried_ids: sel.queries.ids,
            plcs_count: sel.harvested.len(),
            budget_spent: pool.budget_spent(),
            target_accuracy: evaluate(&model, dataset, config.eval_split, &holdout)?,
            mean_pv,
            selection_ms,
            train_loss,
        });
    }

    Ok(RunOutcome {
        metrics,
        model,
        pool,
        holdout,
        warmup_accuracy,
        kappa_schedule,
    })
}
