use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::{fold_assignment, split_fold, Example};
use super::{
    build_vocabulary, featurize, fit_platt, train_svm, Calibration, Class, ClassifierError,
    FeatureVector, Mode, Result, TrainConfig, UnigramWeighting, Vocabulary,
};
use crate::corpus::{Domain, ParsedRequest};
use crate::strategies::{Strategy, StrategyProfile};
use crate::Scalar;

/// Version of the model file layout.
pub const MODEL_VERSION: u32 = 1;

/// Outcome of scoring one request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction<T: Scalar> {
    pub class: Class,
    #[serde(bound = "")]
    pub margin: T,
    /// Calibrated probability of the polite class, in (0, 1).
    #[serde(bound = "")]
    pub score: T,
}

/// Linear politeness classifier. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel<T: Scalar> {
    trained_domain: Domain,
    mode: Mode,
    min_count: usize,
    unigrams: UnigramWeighting,
    vocabulary: Vocabulary,
    weights: Vec<T>,
    bias: T,
    calibration: Option<Calibration<T>>,
    provenance: Option<serde_json::Value>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc<T: Scalar> {
    version: u32,
    trained_domain: Domain,
    mode: Mode,
    min_count: usize,
    #[serde(default)]
    unigrams: UnigramWeighting,
    vocabulary: BTreeMap<String, usize>,
    #[serde(bound = "")]
    weights: Vec<T>,
    #[serde(bound = "")]
    bias: T,
    #[serde(bound = "")]
    calibration: Option<Calibration<T>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    provenance: Option<serde_json::Value>,
}

impl<T: Scalar> LinearModel<T> {
    /// Assembles a model from explicit parameters.
    pub fn new(
        vocabulary: Vocabulary,
        weights: Vec<T>,
        bias: T,
        mode: Mode,
        trained_domain: Domain,
    ) -> Result<Self> {
        let expected = vocabulary.len() + Strategy::COUNT;
        if weights.len() != expected {
            return Err(ClassifierError::DimensionMismatch {
                expected,
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite()) || !bias.is_finite() {
            return Err(ClassifierError::InvalidModel("non-finite parameter".into()));
        }
        Ok(LinearModel {
            trained_domain,
            mode,
            min_count: 0,
            unigrams: UnigramWeighting::Count,
            vocabulary,
            weights,
            bias,
            calibration: None,
            provenance: None,
        })
    }

    /// Builds the vocabulary from `examples` and trains the linear weights.
    /// The result is deterministic in the set of examples, independent of
    /// their order.
    pub fn fit_uncalibrated(
        examples: &[Example<'_>],
        config: &TrainConfig,
        trained_domain: Domain,
    ) -> Result<Self> {
        if examples.is_empty() {
            return Err(ClassifierError::EmptyTrainingSet);
        }
        let mut sorted: Vec<&Example<'_>> = examples.iter().collect();
        sorted.sort_by(|a, b| a.request.id.cmp(&b.request.id));

        let vocabulary = build_vocabulary(sorted.iter().map(|e| e.request), config.min_count)?;
        let data: Vec<(FeatureVector<T>, Class)> = sorted
            .iter()
            .map(|e| {
                let x = featurize(e.request, &vocabulary, &e.profile, config.mode, config.unigrams);
                (x, e.class)
            })
            .collect();
        let dim = vocabulary.len() + Strategy::COUNT;
        let solution = train_svm(&data, dim, &config.svm)?;
        Ok(LinearModel {
            trained_domain,
            mode: config.mode,
            min_count: config.min_count,
            unigrams: config.unigrams,
            vocabulary,
            weights: solution.weights,
            bias: solution.bias,
            calibration: None,
            provenance: None,
        })
    }

    pub fn trained_domain(&self) -> Domain {
        self.trained_domain
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn min_count(&self) -> usize {
        self.min_count
    }

    pub fn unigram_weighting(&self) -> UnigramWeighting {
        self.unigrams
    }

    pub fn vocabulary(&self) -> &Vocabulary {
        &self.vocabulary
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn bias(&self) -> T {
        self.bias
    }

    pub fn calibration(&self) -> Option<Calibration<T>> {
        self.calibration
    }

    pub fn with_calibration(mut self, calibration: Calibration<T>) -> Self {
        self.calibration = Some(calibration);
        self
    }

    pub fn provenance(&self) -> Option<&serde_json::Value> {
        self.provenance.as_ref()
    }

    /// Attaches an opaque provenance record, stored with the model file.
    pub fn with_provenance(mut self, provenance: serde_json::Value) -> Self {
        self.provenance = Some(provenance);
        self
    }

    pub fn features(&self, request: &ParsedRequest, profile: &StrategyProfile) -> FeatureVector<T> {
        featurize(request, &self.vocabulary, profile, self.mode, self.unigrams)
    }

    pub fn margin(&self, request: &ParsedRequest, profile: &StrategyProfile) -> T {
        self.features(request, profile).dot(&self.weights) + self.bias
    }

    /// Class by the sign of the margin; needs no calibration.
    pub fn classify(&self, request: &ParsedRequest, profile: &StrategyProfile) -> Class {
        Class::from_margin(self.margin(request, profile))
    }

    /// Fits the calibration sigmoid on the margins of held-out examples.
    pub fn calibrate(self, held_out: &[Example<'_>]) -> Result<Self> {
        let margins: Vec<T> = held_out
            .iter()
            .map(|e| self.margin(e.request, &e.profile))
            .collect();
        let labels: Vec<bool> = held_out.iter().map(|e| e.class == Class::Polite).collect();
        let calibration = fit_platt(&margins, &labels)?;
        Ok(self.with_calibration(calibration))
    }

    pub fn predict(&self, request: &ParsedRequest, profile: &StrategyProfile) -> Result<Prediction<T>> {
        let calibration = self.calibration.ok_or(ClassifierError::Uncalibrated)?;
        let margin = self.margin(request, profile);
        Ok(Prediction {
            class: Class::from_margin(margin),
            margin,
            score: calibration.score(margin),
        })
    }

    /// Scores many requests in parallel; results are in input order.
    pub fn predict_batch(
        &self,
        items: &[(&ParsedRequest, StrategyProfile)],
    ) -> Result<Vec<Prediction<T>>> {
        if self.calibration.is_none() {
            return Err(ClassifierError::Uncalibrated);
        }
        items
            .par_iter()
            .map(|(r, p)| self.predict(r, p))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            version: MODEL_VERSION,
            trained_domain: self.trained_domain,
            mode: self.mode,
            min_count: self.min_count,
            unigrams: self.unigrams,
            vocabulary: self.vocabulary.index().clone(),
            weights: self.weights.clone(),
            bias: self.bias,
            calibration: self.calibration,
            provenance: self.provenance.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDoc<T> =
            serde_json::from_str(text).map_err(|e| ClassifierError::InvalidModel(e.to_string()))?;
        if doc.version != MODEL_VERSION {
            return Err(ClassifierError::InvalidModel(format!(
                "unsupported model version {}",
                doc.version
            )));
        }
        let vocabulary = Vocabulary::from_index(doc.vocabulary)?;
        let mut model = LinearModel::new(vocabulary, doc.weights, doc.bias, doc.mode, doc.trained_domain)?;
        model.min_count = doc.min_count;
        model.unigrams = doc.unigrams;
        model.calibration = doc.calibration;
        model.provenance = doc.provenance;
        Ok(model)
    }
}

/// Trains a model and calibrates it on out-of-fold margins from an internal
/// stratified split of the same examples.
pub fn fit_model<T: Scalar>(
    examples: &[Example<'_>],
    config: &TrainConfig,
    trained_domain: Domain,
) -> Result<LinearModel<T>> {
    let model = LinearModel::<T>::fit_uncalibrated(examples, config, trained_domain)?;
    let k = config.calibration_folds;
    let folds = fold_assignment(examples, k, config.svm.seed)?;
    let per_fold: Vec<Vec<(T, bool)>> = (0..k)
        .into_par_iter()
        .map(|fold| -> Result<Vec<(T, bool)>> {
            let (train, test) = split_fold(examples, &folds, fold);
            let inner = LinearModel::<T>::fit_uncalibrated(&train, config, trained_domain)?;
            Ok(test
                .iter()
                .map(|e| (inner.margin(e.request, &e.profile), e.class == Class::Polite))
                .collect())
        })
        .collect::<Result<_>>()?;
    let (margins, labels): (Vec<T>, Vec<bool>) = per_fold.into_iter().flatten().unzip();
    let calibration = fit_platt(&margins, &labels)?;
    Ok(model.with_calibration(calibration))
}
