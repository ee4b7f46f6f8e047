//! Computational politeness toolkit.
//!
//! The crate covers the full analysis chain for politeness in requests:
//!
//! * [`corpus`]: parsed requests (CoNLL-U ingestion), crowdsourced annotation
//!   normalization and aggregation, quartile analysis and annotator agreement.
//! * [`strategies`]: twenty lexical and dependency-pattern politeness strategy
//!   detectors.
//! * [`classifier`]: unigram and strategy featurization, a linear hinge-loss
//!   classifier, sigmoid calibration and the evaluation protocols.
//! * [`stats`]: exact and approximate rank tests, the binomial test, and the
//!   strategy table and group comparison reports built from them.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`). The aliases at
//! the crate root fix the scalar to `f64`, which is what the command-line tool
//! uses.

pub mod classifier;
pub mod corpus;
pub mod num;
pub mod stats;
pub mod strategies;

pub use num::Scalar;
pub use strategies::{Lexicons, Strategy, StrategyProfile};

pub type AnnotationSet = corpus::AnnotationSet<f64>;
pub type ScoredRequest = corpus::ScoredRequest<f64>;
pub type Aggregation = corpus::Aggregation<f64>;
pub type FeatureVector = classifier::FeatureVector<f64>;
pub type LinearModel = classifier::LinearModel<f64>;
pub type Calibration = classifier::Calibration<f64>;
pub type EvalReport = classifier::EvalReport<f64>;
pub type TestResult = stats::TestResult<f64>;
pub type StrategyRow = stats::StrategyRow<f64>;
pub type GroupComparison = stats::GroupComparison<f64>;

pub type LinearModelF32 = classifier::LinearModel<f32>;
pub type TestResultF32 = stats::TestResult<f32>;
