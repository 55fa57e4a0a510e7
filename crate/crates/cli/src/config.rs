//! Flat `key=value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Later assignments
//! win, and command-line overrides are applied after the file.

use std::fmt::Display;
use std::path::PathBuf;
use std::str::FromStr;

use gpada::data::SyntheticSpec;
use gpada::engine::{EvalSplit, LoopConfig, Strategy};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected key=value, found {text:?}")]
    Malformed { line: usize, text: String },
    #[error("{origin}: unknown key {key:?}")]
    UnknownKey { origin: String, key: String },
    #[error("{origin}: cannot parse {key}={value:?}: {reason}")]
    BadValue {
        origin: String,
        key: String,
        value: String,
        reason: String,
    },
    #[error("{origin}: {key}={value} is outside {range}")]
    OutOfRange {
        origin: String,
        key: String,
        value: String,
        range: &'static str,
    },
    #[error("both a dataset file and synthetic.* keys are set; choose one dataset source")]
    ConflictingSources,
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

/// Where the records come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DatasetSource {
    File(PathBuf),
    Synthetic(SyntheticSpec),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub loop_config: LoopConfig,
    pub source: DatasetSource,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            loop_config: LoopConfig::default(),
            source: DatasetSource::Synthetic(SyntheticSpec::default()),
            out_dir: PathBuf::from("out"),
        }
    }
}

/// One `key=value` assignment and where it came from, for diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub origin: String,
    pub key: String,
    pub value: String,
}

impl Assignment {
    pub fn new(origin: impl Into<String>, key: impl Into<String>, value: impl Into<String>) -> Self {
        Self {
            origin: origin.into(),
            key: key.into(),
            value: value.into(),
        }
    }

    /// Parses a `key=value` override such as a `--set` argument.
    pub fn parse_override(text: &str) -> Result<Self, ConfigError> {
        split_pair(text)
            .map(|(k, v)| Self::new("override", k, v))
            .ok_or_else(|| ConfigError::Malformed {
                line: 0,
                text: text.to_string(),
            })
    }
}

fn split_pair(text: &str) -> Option<(&str, &str)> {
    let (k, v) = text.split_once('=')?;
    let k = k.trim();
    (!k.is_empty()).then_some((k, v.trim()))
}

/// Reads the assignments of a configuration file body.
pub fn parse_lines(text: &str) -> Result<Vec<Assignment>, ConfigError> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = split_pair(line).ok_or_else(|| ConfigError::Malformed {
            line: idx + 1,
            text: line.to_string(),
        })?;
        out.push(Assignment::new(format!("line {}", idx + 1), k, v));
    }
    Ok(out)
}

/// Builds a configuration from file text followed by overrides.
pub fn parse_config(text: &str, overrides: &[Assignment]) -> Result<RunConfig, ConfigError> {
    let mut all = parse_lines(text)?;
    all.extend(overrides.iter().cloned());
    build(&all)
}

fn value<T>(a: &Assignment) -> Result<T, ConfigError>
where
    T: FromStr,
    T::Err: Display,
{
    a.value.parse::<T>().map_err(|e| ConfigError::BadValue {
        origin: a.origin.clone(),
        key: a.key.clone(),
        value: a.value.clone(),
        reason: e.to_string(),
    })
}

fn ranged(a: &Assignment, ok: impl Fn(f64) -> bool, range: &'static str) -> Result<f64, ConfigError> {
    let v: f64 = value(a)?;
    if ok(v) {
        Ok(v)
    } else {
        Err(ConfigError::OutOfRange {
            origin: a.origin.clone(),
            key: a.key.clone(),
            value: a.value.clone(),
            range,
        })
    }
}

fn build(assignments: &[Assignment]) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let lc = &mut cfg.loop_config;
    let mut spec = SyntheticSpec::default();
    let mut synthetic_seed = None;
    let mut synthetic_keys = false;
    let mut dataset = None;
    let unit = |v: f64| (0.0..=1.0).contains(&v);
    let non_negative = |v: f64| v >= 0.0 && v.is_finite();
    let positive = |v: f64| v > 0.0 && v.is_finite();

    for a in assignments {
        match a.key.as_str() {
            "rounds" => lc.rounds = value(a)?,
            "budget_fraction" => lc.budget_fraction = ranged(a, unit, "[0, 1]")?,
            "kappa_start" => lc.kappa_start = ranged(a, non_negative, "[0, inf)")?,
            "kappa_step" => lc.kappa_step = ranged(a, non_negative, "[0, inf)")?,
            "warmup_epochs" => lc.warmup_epochs = value(a)?,
            "epochs_per_round" => lc.epochs_per_round = value(a)?,
            "alpha" => lc.alpha = ranged(a, unit, "[0, 1]")?,
            "lambda" => lc.lambda = ranged(a, non_negative, "[0, inf)")?,
            "jitter" => lc.jitter = ranged(a, positive, "(0, inf)")?,
            "learning_rate" => lc.optimizer.learning_rate = ranged(a, positive, "(0, inf)")?,
            "momentum" => lc.optimizer.momentum = ranged(a, |v| (0.0..1.0).contains(&v), "[0, 1)")?,
            "weight_decay" => lc.optimizer.weight_decay = ranged(a, non_negative, "[0, inf)")?,
            "batch_size" => lc.optimizer.batch_size = value(a)?,
            "committee_size" => lc.committee_size = value(a)?,
            "committee_sigma" => {
                lc.committee_sigma = if a.value == "auto" {
                    None
                } else {
                    Some(ranged(a, non_negative, "[0, inf) or auto")?)
                }
            }
            "eval_fraction" => lc.eval_fraction = ranged(a, |v| (0.0..1.0).contains(&v), "[0, 1)")?,
            "eval_split" => lc.eval_split = value::<EvalSplit>(a)?,
            "strategy" => lc.strategy = value::<Strategy>(a)?,
            "seed" => lc.seed = value(a)?,
            "out" => cfg.out_dir = PathBuf::from(&a.value),
            "dataset" => dataset = Some(PathBuf::from(&a.value)),
            key => {
                let Some(field) = key.strip_prefix("synthetic.") else {
                    return Err(unknown(a));
                };
                synthetic_keys = true;
                match field {
                    "num_classes" => spec.num_classes = value(a)?,
                    "dim" => spec.dim = value(a)?,
                    "per_class_per_domain" => spec.per_class_per_domain = value(a)?,
                    "shift_magnitude" => spec.shift_magnitude = ranged(a, non_negative, "[0, inf)")?,
                    "rotation_angle" => spec.rotation_angle = value(a)?,
                    "noise_sigma" => spec.noise_sigma = ranged(a, positive, "(0, inf)")?,
                    "seed" => synthetic_seed = Some(value(a)?),
                    _ => return Err(unknown(a)),
                }
            }
        }
    }

    cfg.source = match (dataset, synthetic_keys) {
        (Some(_), true) => return Err(ConfigError::ConflictingSources),
        (Some(path), false) => DatasetSource::File(path),
        (None, _) => {
            spec.seed = synthetic_seed.unwrap_or(cfg.loop_config.seed);
            spec.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            DatasetSource::Synthetic(spec)
        }
    };
    cfg.loop_config
        .validate()
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    Ok(cfg)
}

fn unknown(a: &Assignment) -> ConfigError {
    ConfigError::UnknownKey {
        origin: a.origin.clone(),
        key: a.key.clone(),
    }
}
