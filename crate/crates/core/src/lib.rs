//! Active domain adaptation over precomputed feature vectors.
//!
//! The crate implements a round-based adaptation loop that combines three
//! selection mechanisms on top of a linear softmax head:
//!
//! * confident pseudo-label harvesting per class ([`sampling::plcs_select`]),
//! * class-wise Gaussian-process posterior-variance querying
//!   ([`gp::class_wise_variances`], [`sampling::gpas_select`]),
//! * uncertainty-balanced class resampling of the target epoch
//!   ([`sampling::ucs_update`], [`sampling::ucs_resample`]),
//!
//! trained with cross-entropy on labeled data plus a perturbation-consistency
//! entropy loss on unlabeled target data ([`model::total_loss`]).
//!
//! [`engine::run_ada`] drives the whole loop.

pub mod data;
pub mod engine;
pub mod gp;
pub mod model;
pub mod rng;
pub mod sampling;

pub use data::{DataError, Dataset, Domain, FeatureRecord, PoolState, SyntheticSpec};
pub use engine::{
    evaluate, query_oracle, run_ada, EngineError, EvalSplit, LoopConfig, RoundMetrics, RunOutcome, Strategy,
    TargetSplit,
};
pub use gp::{ClassGpPosterior, GpError, KernelMatrix, PosteriorVarianceVector};
pub use model::{CommitteeConfig, ModelError, ModelState, OptimizerConfig};
pub use sampling::{ClassUncertaintyState, ConfidentSelection, QuerySelection};
