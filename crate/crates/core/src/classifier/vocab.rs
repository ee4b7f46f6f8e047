use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ClassifierError, Result};
use crate::corpus::{ParsedRequest, Token};

/// Unigrams occurring fewer times than this in training are excluded.
pub const DEFAULT_MIN_COUNT: usize = 10;

/// The unigram form of a token: its lowercased surface.
pub fn unigram(token: &Token) -> String {
    token.surface.to_lowercase()
}

/// Token to feature index map, indices assigned in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vocabulary {
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from a stored map, checking that the indices
    /// are exactly `0..len` in token order.
    pub fn from_index(index: BTreeMap<String, usize>) -> Result<Self> {
        for (expected, (token, &i)) in index.iter().enumerate() {
            if i != expected {
                return Err(ClassifierError::InvalidModel(format!(
                    "vocabulary token {token:?} has index {i}, expected {expected}"
                )));
            }
        }
        Ok(Vocabulary { index })
    }

    pub fn get(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.index.keys().map(String::as_str)
    }

    pub fn index(&self) -> &BTreeMap<String, usize> {
        &self.index
    }
}

/// Vocabulary of the unigrams that occur at least `min_count` times in the
/// training requests.
pub fn build_vocabulary<'a, I>(requests: I, min_count: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = &'a ParsedRequest>,
{
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut any = false;
    for request in requests {
        any = true;
        for token in request.tokens() {
            *counts.entry(unigram(token)).or_default() += 1;
        }
    }
    if !any {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    let index: BTreeMap<String, usize> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_count)
        .enumerate()
        .map(|(i, (t, _))| (t, i))
        .collect();
    if index.is_empty() {
        return Err(ClassifierError::EmptyVocabulary(min_count));
    }
    Ok(Vocabulary { index })
}
