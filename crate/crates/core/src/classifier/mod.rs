//! Featurization, linear max-margin training, calibration and evaluation.

mod calibration;
mod eval;
mod features;
mod model;
mod svm;
mod vocab;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calibration::{fit_platt, Calibration};
pub use eval::{
    class_labels, evaluate_cross_domain, evaluate_holdout, evaluate_in_domain, fold_assignment,
    EvalReport, Example, Protocol,
};
pub use features::{featurize, FeatureVector};
pub use model::{fit_model, LinearModel, Prediction, MODEL_VERSION};
pub use svm::{svm_objective, train_svm, SvmConfig, SvmSolution};
pub use vocab::{build_vocabulary, unigram, Vocabulary, DEFAULT_MIN_COUNT};

use crate::corpus::CorpusError;

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("empty training set")]
    EmptyTrainingSet,
    #[error("no unigram occurs at least {0} times in the training data")]
    EmptyVocabulary(usize),
    #[error("training data contains a single class")]
    SingleClass,
    #[error("feature index {index} out of range for dimension {dim}")]
    FeatureOutOfRange { index: usize, dim: usize },
    #[error("feature dimension {got} does not match the model ({expected})")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("degenerate calibration: all margins are equal")]
    DegenerateCalibration,
    #[error("calibration slope {0} is not positive; margins do not order the classes")]
    InvertedCalibration(f64),
    #[error("model is not calibrated")]
    Uncalibrated,
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("cannot split {n} examples into {k} folds")]
    TooManyFolds { k: usize, n: usize },
    #[error("request id {0:?} occurs in both training and test data")]
    OverlappingIds(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub type Result<T, E = ClassifierError> = std::result::Result<T, E>;

/// Feature set: unigrams only, or unigrams plus the strategy flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Bow,
    Ling,
}

impl FromStr for Mode {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bow" => Ok(Mode::Bow),
            "ling" => Ok(Mode::Ling),
            other => Err(ClassifierError::InvalidConfig(format!("unknown mode {other:?}"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Bow => "bow",
            Mode::Ling => "ling",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Class {
    Impolite,
    Polite,
}

impl Class {
    /// +1 for polite, -1 for impolite.
    pub fn sign(self) -> f64 {
        match self {
            Class::Polite => 1.0,
            Class::Impolite => -1.0,
        }
    }

    /// Decision rule: polite iff the margin is strictly positive.
    pub fn from_margin<T: crate::Scalar>(margin: T) -> Class {
        if margin > T::zero() {
            Class::Polite
        } else {
            Class::Impolite
        }
    }
}

impl fmt::Display for Class {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Class::Polite => "polite",
            Class::Impolite => "impolite",
        })
    }
}

/// How unigram occurrences are encoded.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UnigramWeighting {
    #[default]
    Count,
    Binary,
}

/// Everything that shapes a trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub mode: Mode,
    pub min_count: usize,
    pub unigrams: UnigramWeighting,
    pub svm: SvmConfig,
    /// Folds of the internal split that produces calibration margins.
    pub calibration_folds: usize,
}

impl TrainConfig {
    pub fn new(mode: Mode) -> Self {
        TrainConfig {
            mode,
            min_count: DEFAULT_MIN_COUNT,
            unigrams: UnigramWeighting::Count,
            svm: SvmConfig::default(),
            calibration_folds: 5,
        }
    }
}

#[cfg(test)]
pub(crate) mod test_util {
    use crate::corpus::{Domain, ParsedRequest, ParsedSentence, Token};

    /// One-sentence request whose tokens are `words`.
    pub fn request(id: &str, words: &[&str]) -> ParsedRequest {
        let tokens = words
            .iter()
            .enumerate()
            .map(|(i, w)| Token::new(i + 1, *w, *w, "X").unwrap())
            .collect();
        let sentences = if words.is_empty() {
            vec![]
        } else {
            vec![ParsedSentence::new(tokens, vec![]).unwrap()]
        };
        ParsedRequest::new(id, Domain::Other, sentences)
    }
}
