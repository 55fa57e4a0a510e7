use std::collections::{BTreeMap, BTreeSet};

use super::{DataError, Dataset};

/// Partition of the target pool into queried, pseudo-labeled and unlabeled
/// ids, plus the query budget ledger.
///
/// Every target id in the pool lives in exactly one of the three sets, and
/// `budget_spent` always equals the number of queried ids.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolState {
    source_ids: Vec<u64>,
    queried: BTreeSet<u64>,
    plcs: BTreeMap<u64, usize>,
    unlabeled: BTreeSet<u64>,
    budget_total: usize,
    rounds: usize,
}

/// Builds the initial pool over every target record of `dataset`.
pub fn split_pools(dataset: &Dataset, budget_fraction: f64, rounds: usize) -> Result<PoolState, DataError> {
    PoolState::new(dataset.source_ids(), dataset.target_ids(), budget_fraction, rounds)
}

impl PoolState {
    /// Builds a pool over an explicit set of target ids (e.g. after a
    /// held-out evaluation split was removed).
    pub fn new(
        source_ids: Vec<u64>,
        target_ids: Vec<u64>,
        budget_fraction: f64,
        rounds: usize,
    ) -> Result<Self, DataError> {
        if !(0.0..=1.0).contains(&budget_fraction) {
            return Err(DataError::InvalidBudget(format!(
                "budget fraction {budget_fraction} outside [0, 1]"
            )));
        }
        if rounds == 0 {
            return Err(DataError::InvalidBudget("rounds must be at least 1".into()));
        }
        let unlabeled: BTreeSet<u64> = target_ids.into_iter().collect();
        let budget_total = (budget_fraction * unlabeled.len() as f64 + 1e-9).floor() as usize;
        if budget_fraction > 0.0 && budget_total < rounds {
            return Err(DataError::InvalidBudget(format!(
                "total budget {budget_total} is smaller than {rounds} rounds; per-round budget would be zero"
            )));
        }
        Ok(Self {
            source_ids,
            queried: BTreeSet::new(),
            plcs: BTreeMap::new(),
            unlabeled,
            budget_total,
            rounds,
        })
    }

    pub fn source_ids(&self) -> &[u64] {
        &self.source_ids
    }

    pub fn queried_ids(&self) -> &BTreeSet<u64> {
        &self.queried
    }

    /// Pseudo-labeled target ids with their stored labels.
    pub fn plcs_labels(&self) -> &BTreeMap<u64, usize> {
        &self.plcs
    }

    pub fn unlabeled_ids(&self) -> &BTreeSet<u64> {
        &self.unlabeled
    }

    pub fn is_unlabeled(&self, id: u64) -> bool {
        self.unlabeled.contains(&id)
    }

    pub fn budget_total(&self) -> usize {
        self.budget_total
    }

    pub fn budget_spent(&self) -> usize {
        self.queried.len()
    }

    pub fn budget_remaining(&self) -> usize {
        self.budget_total - self.budget_spent()
    }

    pub fn rounds(&self) -> usize {
        self.rounds
    }

    /// Per-round budget `b = floor(B / R)`.
    pub fn per_round_budget(&self) -> usize {
        self.budget_total / self.rounds
    }

    /// Budget for 1-based `round`; the final round also takes the remainder.
    pub fn round_budget(&self, round: usize) -> usize {
        let b = self.per_round_budget();
        if round == self.rounds {
            b + self.budget_total % self.rounds
        } else {
            b
        }
    }

    /// All target ids of the pool regardless of state, ascending.
    pub fn target_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self
            .queried
            .iter()
            .chain(self.plcs.keys())
            .chain(self.unlabeled.iter())
            .copied()
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Moves confidently pseudo-labeled ids out of the unlabeled pool.
    /// The budget ledger is untouched.
    pub fn harvest(&mut self, picks: &[(u64, usize)]) -> Result<(), DataError> {
        if let Some(&(id, _)) = picks.iter().find(|(id, _)| !self.unlabeled.contains(id)) {
            return Err(DataError::NotUnlabeled(id));
        }
        for &(id, label) in picks {
            self.unlabeled.remove(&id);
            self.plcs.insert(id, label);
        }
        Ok(())
    }

    /// Overwrites stored pseudo-labels of already harvested ids. Ids that are
    /// not harvested are ignored.
    pub fn refresh_plcs_labels(&mut self, labels: impl Fn(u64) -> Option<usize>) {
        for (id, label) in self.plcs.iter_mut() {
            if let Some(l) = labels(*id) {
                *label = l;
            }
        }
    }

    /// Moves ids into the queried set, spending budget. Fails without
    /// side effects if any id is not unlabeled or the budget would overrun.
    pub fn commit_queries(&mut self, ids: &[u64]) -> Result<(), DataError> {
        let mut seen = BTreeSet::new();
        for &id in ids {
            if !self.unlabeled.contains(&id) || !seen.insert(id) {
                return Err(DataError::NotUnlabeled(id));
            }
        }
        if self.budget_spent() + ids.len() > self.budget_total {
            return Err(DataError::BudgetOverrun {
                requested: ids.len(),
                spent: self.budget_spent(),
                total: self.budget_total,
            });
        }
        for id in ids {
            self.unlabeled.remove(id);
            self.queried.insert(*id);
        }
        Ok(())
    }

    /// Checks that the three target sets are pairwise disjoint.
    pub fn is_partition(&self) -> bool {
        self.queried
            .iter()
            .all(|id| !self.unlabeled.contains(id) && !self.plcs.contains_key(id))
            && self.plcs.keys().all(|id| !self.unlabeled.contains(id))
            && self.budget_spent() <= self.budget_total
    }
}
