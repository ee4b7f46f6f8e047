use std::collections::BTreeMap;

use super::{ClassifierError, Mode, Result, UnigramWeighting, Vocabulary};
use super::vocab::unigram;
use crate::corpus::ParsedRequest;
use crate::strategies::{Strategy, StrategyProfile};
use crate::Scalar;

/// Sparse feature vector. Unigram features take indices `0..vocab_len`; the
/// strategy block takes the trailing `Strategy::COUNT` indices.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T: Scalar> {
    dim: usize,
    /// Sorted by index, no duplicates, no zero values.
    entries: Vec<(usize, T)>,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn new(dim: usize, entries: impl IntoIterator<Item = (usize, T)>) -> Result<Self> {
        let mut merged: BTreeMap<usize, T> = BTreeMap::new();
        for (index, value) in entries {
            if index >= dim {
                return Err(ClassifierError::FeatureOutOfRange { index, dim });
            }
            *merged.entry(index).or_insert_with(T::zero) += value;
        }
        Ok(FeatureVector {
            dim,
            entries: merged.into_iter().filter(|(_, v)| *v != T::zero()).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[(usize, T)] {
        &self.entries
    }

    pub fn get(&self, index: usize) -> T {
        self.entries
            .binary_search_by_key(&index, |e| e.0)
            .map_or(T::zero(), |i| self.entries[i].1)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Dot product with a dense vector of the same dimension, summed in
    /// index order.
    pub fn dot(&self, dense: &[T]) -> T {
        debug_assert_eq!(dense.len(), self.dim);
        self.entries
            .iter()
            .fold(T::zero(), |acc, &(i, v)| acc + v * dense[i])
    }

    pub fn squared_norm(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, &(_, v)| acc + v * v)
    }
}

/// Index of a strategy feature for a vocabulary of `vocab_len` unigrams.
pub fn strategy_index(vocab_len: usize, strategy: Strategy) -> usize {
    vocab_len + strategy.index()
}

/// Features of one request. Out-of-vocabulary tokens are ignored; in BOW
/// mode the strategy block stays empty.
pub fn featurize<T: Scalar>(
    request: &ParsedRequest,
    vocabulary: &Vocabulary,
    profile: &StrategyProfile,
    mode: Mode,
    weighting: UnigramWeighting,
) -> FeatureVector<T> {
    let vocab_len = vocabulary.len();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for token in request.tokens() {
        if let Some(i) = vocabulary.get(&unigram(token)) {
            *counts.entry(i).or_default() += 1;
        }
    }
    let mut entries: Vec<(usize, T)> = counts
        .into_iter()
        .map(|(i, c)| {
            let v = match weighting {
                UnigramWeighting::Count => T::from_usize_lossy(c),
                UnigramWeighting::Binary => T::one(),
            };
            (i, v)
        })
        .collect();
    if mode == Mode::Ling {
        entries.extend(
            profile
                .fired()
                .map(|s| (strategy_index(vocab_len, s), T::one())),
        );
    }
    FeatureVector {
        dim: vocab_len + Strategy::COUNT,
        entries,
    }
}
