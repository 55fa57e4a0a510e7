use std::fmt;
use std::str::FromStr;

use super::EngineError;
use crate::data::{Dataset, Domain};
use crate::gp::DEFAULT_JITTER;
use crate::model::{CommitteeConfig, OptimizerConfig};
use crate::sampling::DEFAULT_ALPHA;

/// How query candidates are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryRule {
    Gpas,
    Random,
    Entropy,
}

/// Ablation variants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    GpasPlcsUcs,
    GpasUcs,
    Gpas,
    Random,
    Entropy,
}

impl Strategy {
    pub const ALL: [Strategy; 5] = [
        Strategy::GpasPlcsUcs,
        Strategy::GpasUcs,
        Strategy::Gpas,
        Strategy::Random,
        Strategy::Entropy,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::GpasPlcsUcs => "gpas_plcs_ucs",
            Strategy::GpasUcs => "gpas_ucs",
            Strategy::Gpas => "gpas",
            Strategy::Random => "random",
            Strategy::Entropy => "entropy",
        }
    }

    pub fn query_rule(self) -> QueryRule {
        match self {
            Strategy::Random => QueryRule::Random,
            Strategy::Entropy => QueryRule::Entropy,
            _ => QueryRule::Gpas,
        }
    }

    pub fn uses_plcs(self) -> bool {
        matches!(self, Strategy::GpasPlcsUcs)
    }

    pub fn uses_ucs(self) -> bool {
        matches!(self, Strategy::GpasPlcsUcs | Strategy::GpasUcs)
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.as_str() == s)
            .ok_or_else(|| format!("unknown strategy {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalSplit {
    /// Every target record, including queried and pseudo-labeled ones.
    TargetAll,
    /// Only the held-out target records.
    TargetEval,
}

impl EvalSplit {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalSplit::TargetAll => "target_all",
            EvalSplit::TargetEval => "target_eval",
        }
    }
}

impl FromStr for EvalSplit {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "target_all" => Ok(EvalSplit::TargetAll),
            "target_eval" => Ok(EvalSplit::TargetEval),
            _ => Err(format!("unknown split {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopConfig {
    pub rounds: usize,
    /// Total query budget as a fraction of the target pool.
    pub budget_fraction: f64,
    /// PLCS percentage in round 1.
    pub kappa_start: f64,
    pub kappa_step: f64,
    pub warmup_epochs: usize,
    pub epochs_per_round: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub jitter: f64,
    pub optimizer: OptimizerConfig,
    pub committee_size: usize,
    /// `None` derives sigma from the mean target feature norm.
    pub committee_sigma: Option<f64>,
    /// Fraction of target records held out from every pool.
    pub eval_fraction: f64,
    pub eval_split: EvalSplit,
    pub strategy: Strategy,
    pub seed: u64,
}

impl Default for LoopConfig {
    fn default() -> Self {
        Self {
            rounds: 5,
            budget_fraction: 0.05,
            kappa_start: 1.0,
            kappa_step: 1.0,
            warmup_epochs: 5,
            epochs_per_round: 3,
            alpha: DEFAULT_ALPHA,
            lambda: 1.0,
            jitter: DEFAULT_JITTER,
            optimizer: OptimizerConfig::default(),
            committee_size: CommitteeConfig::DEFAULT_SIZE,
            committee_sigma: None,
            eval_fraction: 0.2,
            eval_split: EvalSplit::TargetEval,
            strategy: Strategy::GpasPlcsUcs,
            seed: 0,
        }
    }
}

impl LoopConfig {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |m: String| Err(EngineError::InvalidConfig(m));
        if self.rounds == 0 {
            return bad("rounds must be at least 1".into());
        }
        if self.epochs_per_round == 0 {
            return bad("epochs_per_round must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.budget_fraction) {
            return bad(format!("budget_fraction {} outside [0, 1]", self.budget_fraction));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return bad(format!("alpha {} outside [0, 1]", self.alpha));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be non-negative, got {}", self.lambda));
        }
        if !(self.jitter > 0.0 && self.jitter.is_finite()) {
            return bad(format!("jitter must be positive, got {}", self.jitter));
        }
        for (name, v) in [("kappa_start", self.kappa_start), ("kappa_step", self.kappa_step)] {
            if !(v >= 0.0 && v.is_finite()) {
                return bad(format!("{name} must be non-negative, got {v}"));
            }
        }
        if !(0.0..1.0).contains(&self.eval_fraction) {
            return bad(format!("eval_fraction {} outside [0, 1)", self.eval_fraction));
        }
        if self.eval_split == EvalSplit::TargetEval && self.eval_fraction == 0.0 {
            return bad("eval_split target_eval needs eval_fraction > 0".into());
        }
        self.optimizer.validate()?;
        CommitteeConfig {
            size: self.committee_size,
            sigma: self.committee_sigma.unwrap_or(0.0),
        }
        .validate()?;
        Ok(())
    }

    /// PLCS percentage at 1-based `round`.
    pub fn kappa_at(&self, round: usize) -> f64 {
        self.kappa_start + (round - 1) as f64 * self.kappa_step
    }

    pub fn committee(&self, dataset: &Dataset) -> CommitteeConfig {
        CommitteeConfig {
            size: self.committee_size,
            sigma: self
                .committee_sigma
                .unwrap_or_else(|| CommitteeConfig::auto_sigma(dataset.mean_norm(Domain::Target), dataset.dim())),
        }
    }

    pub fn total_epochs(&self) -> usize {
        self.warmup_epochs + self.rounds * self.epochs_per_round
    }
}
