use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{Class, ClassifierError, LinearModel, Mode, Result, TrainConfig};
use crate::corpus::{CorpusError, ParsedRequest};
use crate::strategies::StrategyProfile;
use crate::Scalar;

/// A labeled request with its strategy profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example<'a> {
    pub request: &'a ParsedRequest,
    pub profile: StrategyProfile,
    pub class: Class,
}

/// Binary classes from politeness scores: the `ceil(n/4)` highest-ranked
/// items are polite, the `ceil(n/4)` lowest impolite, the rest unlabeled.
/// Items are ranked by score, ties broken by id.
pub fn class_labels<T: Scalar>(scores: &[(&str, T)]) -> Result<Vec<Option<Class>>> {
    let n = scores.len();
    if n < 2 {
        return Err(CorpusError::TooFew { needed: 2, got: n }.into());
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        scores[a]
            .1
            .partial_cmp(&scores[b].1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| scores[a].0.cmp(scores[b].0))
    });
    let m = n.div_ceil(4);
    let mut labels = vec![None; n];
    for &i in &order[..m] {
        labels[i] = Some(Class::Impolite);
    }
    for &i in &order[n - m..] {
        labels[i] = Some(Class::Polite);
    }
    Ok(labels)
}

/// Stratified fold index for every example. Within each class, examples are
/// put in id order, shuffled with `seed` and dealt round-robin, so the
/// assignment does not depend on input order.
pub fn fold_assignment(examples: &[Example<'_>], k: usize, seed: u64) -> Result<Vec<usize>> {
    let n = examples.len();
    if k < 2 {
        return Err(ClassifierError::InvalidProtocol(format!(
            "need at least 2 folds, got {k}"
        )));
    }
    if k > n {
        return Err(ClassifierError::TooManyFolds { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; n];
    let mut next = 0;
    for class in [Class::Impolite, Class::Polite] {
        let mut members: Vec<usize> = (0..n).filter(|&i| examples[i].class == class).collect();
        members.sort_by(|&a, &b| examples[a].request.id.cmp(&examples[b].request.id).then(a.cmp(&b)));
        members.shuffle(&mut rng);
        for i in members {
            folds[i] = next % k;
            next += 1;
        }
    }
    Ok(folds)
}

/// Training (all other folds) and test (`fold`) portions, in input order.
pub(crate) fn split_fold<'a>(
    examples: &[Example<'a>],
    folds: &[usize],
    fold: usize,
) -> (Vec<Example<'a>>, Vec<Example<'a>>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for (e, &f) in examples.iter().zip(folds) {
        if f == fold {
            test.push(*e);
        } else {
            train.push(*e);
        }
    }
    (train, test)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Stratified k-fold cross-validation.
    KFold(usize),
    LeaveOneOut,
    /// Train on one corpus, test on another with no shared request ids.
    CrossDomain,
    /// Train on one set, test on another, without the id check.
    Holdout,
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::KFold(k) => write!(f, "kfold:{k}"),
            Protocol::LeaveOneOut => f.write_str("loo"),
            Protocol::CrossDomain => f.write_str("cross_domain"),
            Protocol::Holdout => f.write_str("holdout"),
        }
    }
}

impl FromStr for Protocol {
    type Err = ClassifierError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "loo" => Ok(Protocol::LeaveOneOut),
            "kfold" => Ok(Protocol::KFold(10)),
            "cross_domain" => Ok(Protocol::CrossDomain),
            "holdout" => Ok(Protocol::Holdout),
            _ => s
                .strip_prefix("kfold:")
                .and_then(|k| k.parse().ok())
                .map(Protocol::KFold)
                .ok_or_else(|| ClassifierError::InvalidProtocol(s.clone())),
        }
    }
}

impl Serialize for Protocol {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Protocol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport<T: Scalar> {
    pub protocol: Protocol,
    pub mode: Mode,
    /// Number of held-out predictions.
    pub n: usize,
    pub correct: usize,
    /// `correct / n`.
    #[serde(bound = "")]
    pub accuracy: T,
    /// Per-fold accuracies (cross-validation only).
    #[serde(bound = "")]
    pub fold_accuracies: Vec<T>,
    /// Mean of the per-fold accuracies (cross-validation only).
    #[serde(bound = "")]
    pub mean: Option<T>,
}

fn ratio<T: Scalar>(correct: usize, n: usize) -> T {
    T::from_usize_lossy(correct) / T::from_usize_lossy(n)
}

fn count_correct<T: Scalar>(model: &LinearModel<T>, test: &[Example<'_>]) -> usize {
    test.iter()
        .filter(|e| model.classify(e.request, &e.profile) == e.class)
        .count()
}

fn domain_of(examples: &[Example<'_>]) -> crate::corpus::Domain {
    examples.first().map(|e| e.request.domain).unwrap_or_default()
}

/// Cross-validated accuracy. Every fold rebuilds the vocabulary from its own
/// training portion.
pub fn evaluate_in_domain<T: Scalar>(
    examples: &[Example<'_>],
    config: &TrainConfig,
    protocol: Protocol,
    seed: u64,
) -> Result<EvalReport<T>> {
    let n = examples.len();
    let (k, folds) = match protocol {
        Protocol::KFold(k) => (k, fold_assignment(examples, k, seed)?),
        Protocol::LeaveOneOut => {
            if n < 2 {
                return Err(ClassifierError::TooManyFolds { k: n, n });
            }
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| examples[a].request.id.cmp(&examples[b].request.id).then(a.cmp(&b)));
            let mut folds = vec![0; n];
            for (fold, i) in order.into_iter().enumerate() {
                folds[i] = fold;
            }
            (n, folds)
        }
        other => {
            return Err(ClassifierError::InvalidProtocol(format!(
                "{other} is not a cross-validation protocol"
            )))
        }
    };
    let domain = domain_of(examples);
    let per_fold: Vec<(usize, usize)> = (0..k)
        .into_par_iter()
        .map(|fold| -> Result<(usize, usize)> {
            let (train, test) = split_fold(examples, &folds, fold);
            let model = LinearModel::<T>::fit_uncalibrated(&train, config, domain)?;
            Ok((count_correct(&model, &test), test.len()))
        })
        .collect::<Result<_>>()?;
    let correct = per_fold.iter().map(|f| f.0).sum();
    let fold_accuracies: Vec<T> = per_fold.iter().map(|&(c, t)| ratio(c, t)).collect();
    Ok(EvalReport {
        protocol,
        mode: config.mode,
        n,
        correct,
        accuracy: ratio(correct, n),
        mean: crate::num::mean(&fold_accuracies),
        fold_accuracies,
    })
}

/// Single train/test pass.
pub fn evaluate_holdout<T: Scalar>(
    train: &[Example<'_>],
    test: &[Example<'_>],
    config: &TrainConfig,
) -> Result<EvalReport<T>> {
    holdout(train, test, config, Protocol::Holdout)
}

/// Train on one corpus and test on another. The corpora must not share
/// request ids.
pub fn evaluate_cross_domain<T: Scalar>(
    train: &[Example<'_>],
    test: &[Example<'_>],
    config: &TrainConfig,
) -> Result<EvalReport<T>> {
    let train_ids: BTreeSet<&str> = train.iter().map(|e| e.request.id.as_str()).collect();
    if let Some(e) = test.iter().find(|e| train_ids.contains(e.request.id.as_str())) {
        return Err(ClassifierError::OverlappingIds(e.request.id.clone()));
    }
    holdout(train, test, config, Protocol::CrossDomain)
}

fn holdout<T: Scalar>(
    train: &[Example<'_>],
    test: &[Example<'_>],
    config: &TrainConfig,
    protocol: Protocol,
) -> Result<EvalReport<T>> {
    if test.is_empty() {
        return Err(ClassifierError::InvalidConfig("empty test set".into()));
    }
    let model = LinearModel::<T>::fit_uncalibrated(train, config, domain_of(train))?;
    let correct = count_correct(&model, test);
    Ok(EvalReport {
        protocol,
        mode: config.mode,
        n: test.len(),
        correct,
        accuracy: ratio(correct, test.len()),
        fold_accuracies: Vec::new(),
        mean: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classifier::test_util::request;

    #[test]
    fn class_sizes() {
        let ids: Vec<String> = (0..4353).map(|i| format!("r{i:05}")).collect();
        let scores: Vec<(&str, f64)> = ids.iter().enumerate().map(|(i, id)| (id.as_str(), (i % 97) as f64)).collect();
        let labels = class_labels(&scores).unwrap();
        let polite = labels.iter().filter(|l| **l == Some(Class::Polite)).count();
        let impolite = labels.iter().filter(|l| **l == Some(Class::Impolite)).count();
        assert_eq!((polite, impolite), (1089, 1089));
        let small = class_labels(&[("a", 1.0), ("b", 0.0), ("c", 0.5)]).unwrap();
        assert_eq!(small, [Some(Class::Polite), Some(Class::Impolite), None]);
        assert!(class_labels(&[("a", 1.0)]).is_err());
    }

    fn examples(reqs: &[ParsedRequest]) -> Vec<Example<'_>> {
        reqs.iter()
            .enumerate()
            .map(|(i, r)| Example {
                request: r,
                profile: StrategyProfile::default(),
                class: if i % 3 == 0 { Class::Polite } else { Class::Impolite },
            })
            .collect()
    }

    #[test]
    fn folds_are_stratified_and_order_free() {
        let reqs: Vec<_> = (0..30).map(|i| request(&format!("r{i:02}"), &["x"])).collect();
        let ex = examples(&reqs);
        let folds = fold_assignment(&ex, 5, 9).unwrap();
        for f in 0..5 {
            let members: Vec<_> = ex.iter().zip(&folds).filter(|(_, &g)| g == f).collect();
            assert_eq!(members.len(), 6);
            assert_eq!(members.iter().filter(|(e, _)| e.class == Class::Polite).count(), 2);
        }
        let mut rev = ex.clone();
        rev.reverse();
        let rev_folds = fold_assignment(&rev, 5, 9).unwrap();
        for (e, f) in rev.iter().zip(&rev_folds) {
            let i = ex.iter().position(|x| x.request.id == e.request.id).unwrap();
            assert_eq!(folds[i], *f);
        }
        assert!(matches!(fold_assignment(&ex, 31, 0), Err(ClassifierError::TooManyFolds { .. })));
        assert!(fold_assignment(&ex, 1, 0).is_err());
    }

    #[test]
    fn protocol_strings() {
        for p in [Protocol::KFold(10), Protocol::LeaveOneOut, Protocol::CrossDomain, Protocol::Holdout] {
            assert_eq!(p.to_string().parse::<Protocol>().unwrap(), p);
        }
        assert_eq!("kfold".parse::<Protocol>().unwrap(), Protocol::KFold(10));
        assert!("kfold:x".parse::<Protocol>().is_err());
        assert_eq!(serde_json::to_string(&Protocol::KFold(3)).unwrap(), "\"kfold:3\"");
    }

    #[test]
    fn too_many_folds_and_wrong_protocol() {
        let reqs: Vec<_> = (0..6).map(|i| request(&format!("r{i}"), &["x"])).collect();
        let ex = examples(&reqs);
        let mut cfg = TrainConfig::new(Mode::Bow);
        cfg.min_count = 1;
        assert!(evaluate_in_domain::<f64>(&ex, &cfg, Protocol::KFold(7), 0).is_err());
        assert!(evaluate_in_domain::<f64>(&ex, &cfg, Protocol::Holdout, 0).is_err());
    }

    #[test]
    fn overlapping_ids_rejected() {
        let reqs: Vec<_> = (0..6).map(|i| request(&format!("r{i}"), &["x", if i % 3 == 0 { "a" } else { "b" }])).collect();
        let ex = examples(&reqs);
        let mut cfg = TrainConfig::new(Mode::Bow);
        cfg.min_count = 1;
        assert!(matches!(
            evaluate_cross_domain::<f64>(&ex, &ex[..2], &cfg),
            Err(ClassifierError::OverlappingIds(_))
        ));
        let r = evaluate_holdout::<f64>(&ex, &ex, &cfg).unwrap();
        assert_eq!((r.n, r.accuracy), (6, 1.0));
    }
}
