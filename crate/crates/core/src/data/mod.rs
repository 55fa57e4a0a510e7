//! Feature records, datasets, the source/target pool partition and the
//! synthetic domain-shift generator.

mod csv;
mod pool;
mod synthetic;

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

pub use self::csv::{load_dataset, parse_dataset, write_dataset};
pub use self::pool::{split_pools, PoolState};
pub use self::synthetic::{generate_synthetic, SyntheticSpec};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("dataset is empty or has no header")]
    MissingHeader,
    #[error("bad header: {0}")]
    BadHeader(String),
    #[error("line {line}: expected {expected} columns, found {found}")]
    DimensionMismatch { line: usize, expected: usize, found: usize },
    #[error("line {line}: invalid id {value:?}")]
    BadId { line: usize, value: String },
    #[error("line {line}: unknown domain {value:?}")]
    BadDomain { line: usize, value: String },
    #[error("line {line}: negative label {value}")]
    NegativeLabel { line: usize, value: i64 },
    #[error("line {line}: invalid label {value:?}")]
    BadLabel { line: usize, value: String },
    #[error("line {line}: non-numeric feature f{column} = {value:?}")]
    NonNumericFeature { line: usize, column: usize, value: String },
    #[error("line {line}: non-finite feature f{column}")]
    NonFiniteFeature { line: usize, column: usize },
    #[error("line {line}: feature vector has zero norm")]
    ZeroNorm { line: usize },
    #[error("record {id}: feature vector has zero norm")]
    ZeroNormRecord { id: u64 },
    #[error("record {id}: non-finite feature")]
    NonFiniteRecord { id: u64 },
    #[error("record {id}: dimensionality {found}, dataset has {expected}")]
    RecordDimension { id: u64, expected: usize, found: usize },
    #[error("record {id}: label {label} out of range for {classes} classes")]
    LabelOutOfRange { id: u64, label: usize, classes: usize },
    #[error("duplicate record id {0}")]
    DuplicateId(u64),
    #[error("class {0} has no source records")]
    MissingSourceClass(usize),
    #[error("need at least 2 classes, found {0}")]
    TooFewClasses(usize),
    #[error("feature dimensionality must be at least 1")]
    EmptyFeatures,
    #[error("invalid synthetic spec: {0}")]
    InvalidSynthetic(String),
    #[error("invalid budget configuration: {0}")]
    InvalidBudget(String),
    #[error("id {0} is not in the unlabeled target pool")]
    NotUnlabeled(u64),
    #[error("querying {requested} labels would exceed the budget ({spent}/{total} spent)")]
    BudgetOverrun {
        requested: usize,
        spent: usize,
        total: usize,
    },
    #[error("unknown record id {0}")]
    UnknownId(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Source,
    Target,
}

impl Domain {
    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Source => "source",
            Domain::Target => "target",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One sample. For target records `true_label` is the held-back annotation
/// that only the simulated oracle may reveal.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRecord {
    pub id: u64,
    pub domain: Domain,
    pub true_label: usize,
    pub features: Vec<f64>,
}

impl FeatureRecord {
    pub fn norm(&self) -> f64 {
        self.features.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A validated collection of records sharing one dimensionality and label space.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    records: Vec<FeatureRecord>,
    num_classes: usize,
    dim: usize,
    index: HashMap<u64, usize>,
}

impl Dataset {
    /// Validates the records. Every class must have at least one source record.
    pub fn new(records: Vec<FeatureRecord>, num_classes: usize) -> Result<Self, DataError> {
        if num_classes < 2 {
            return Err(DataError::TooFewClasses(num_classes));
        }
        let dim = records.first().map_or(0, |r| r.features.len());
        if dim == 0 {
            return Err(DataError::EmptyFeatures);
        }
        let mut index = HashMap::with_capacity(records.len());
        let mut source_seen = vec![false; num_classes];
        for (pos, r) in records.iter().enumerate() {
            if r.features.len() != dim {
                return Err(DataError::RecordDimension {
                    id: r.id,
                    expected: dim,
                    found: r.features.len(),
                });
            }
            if r.true_label >= num_classes {
                return Err(DataError::LabelOutOfRange {
                    id: r.id,
                    label: r.true_label,
                    classes: num_classes,
                });
            }
            if r.features.iter().any(|v| !v.is_finite()) {
                return Err(DataError::NonFiniteRecord { id: r.id });
            }
            if r.norm() <= 0.0 {
                return Err(DataError::ZeroNormRecord { id: r.id });
            }
            if index.insert(r.id, pos).is_some() {
                return Err(DataError::DuplicateId(r.id));
            }
            if r.domain == Domain::Source {
                source_seen[r.true_label] = true;
            }
        }
        if let Some(c) = source_seen.iter().position(|seen| !seen) {
            return Err(DataError::MissingSourceClass(c));
        }
        Ok(Self {
            records,
            num_classes,
            dim,
            index,
        })
    }

    pub fn records(&self) -> &[FeatureRecord] {
        &self.records
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, id: u64) -> Option<&FeatureRecord> {
        self.index.get(&id).map(|&i| &self.records[i])
    }

    pub fn features(&self, id: u64) -> Result<&[f64], DataError> {
        self.get(id)
            .map(|r| r.features.as_slice())
            .ok_or(DataError::UnknownId(id))
    }

    /// Ids of one domain, in file order.
    pub fn ids_in(&self, domain: Domain) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| r.domain == domain)
            .map(|r| r.id)
            .collect()
    }

    pub fn source_ids(&self) -> Vec<u64> {
        self.ids_in(Domain::Source)
    }

    pub fn target_ids(&self) -> Vec<u64> {
        self.ids_in(Domain::Target)
    }

    /// Mean Euclidean norm over the records of one domain.
    pub fn mean_norm(&self, domain: Domain) -> f64 {
        let (sum, n) = self
            .records
            .iter()
            .filter(|r| r.domain == domain)
            .fold((0.0, 0usize), |(s, n), r| (s + r.norm(), n + 1));
        if n == 0 {
            0.0
        } else {
            sum / n as f64
        }
    }
}
