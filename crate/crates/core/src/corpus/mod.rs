//! Requests, annotations and the annotation pipeline.

mod agreement;
mod annotation;
pub mod conllu;
mod quartile;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use agreement::{
    binary_agreement_by_quartile, pairwise_agreement, Agreement, AgreementMode,
    randomize_normalized, QuartileAgreement, ANNOTATORS_PER_REQUEST,
};
pub use annotation::{normalize_and_aggregate, read_annotations, Aggregation, AnnotationSet};
pub use quartile::{assign_quartiles, quartile_split, Quartile, ScoreRecord};

use crate::Scalar;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid token: {0}")]
    InvalidToken(String),
    #[error("invalid sentence: {0}")]
    InvalidSentence(String),
    #[error("{file}:{line}: {message}")]
    Malformed {
        file: String,
        line: usize,
        message: String,
    },
    #[error("annotation batch {batch}: {message}")]
    InvalidBatch { batch: String, message: String },
    #[error("request {0} has no usable annotations")]
    NoAnnotations(String),
    #[error("need at least {needed} items, got {got}")]
    TooFew { needed: usize, got: usize },
    #[error("every worker pair was excluded from the agreement computation")]
    NoValidPairs,
    #[error("unknown domain {0:?}")]
    UnknownDomain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = CorpusError> = std::result::Result<T, E>;

/// Non-fatal issue found while processing data (a dropped worker, an
/// excluded request, ...).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub subject: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(subject: impl Into<String>, message: impl Into<String>) -> Self {
        let d = Diagnostic {
            subject: subject.into(),
            message: message.into(),
        };
        log::warn!("{d}");
        d
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.subject, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    /// 1-based position in the sentence.
    pub index: usize,
    pub surface: String,
    /// Always lowercase.
    pub lemma: String,
    pub upos: String,
}

impl Token {
    pub fn new(
        index: usize,
        surface: impl Into<String>,
        lemma: impl AsRef<str>,
        upos: impl Into<String>,
    ) -> Result<Self> {
        let surface = surface.into();
        if index == 0 {
            return Err(CorpusError::InvalidToken("index must be >= 1".into()));
        }
        if surface.is_empty() {
            return Err(CorpusError::InvalidToken(format!(
                "empty surface at index {index}"
            )));
        }
        Ok(Token {
            index,
            surface,
            lemma: lemma.as_ref().to_lowercase(),
            upos: upos.into(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DepEdge {
    pub relation: String,
    /// Head token index, 0 for the root.
    pub head: usize,
    pub dependent: usize,
}

impl DepEdge {
    pub fn new(relation: impl Into<String>, head: usize, dependent: usize) -> Self {
        DepEdge {
            relation: relation.into(),
            head,
            dependent,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedSentence {
    tokens: Vec<Token>,
    edges: Vec<DepEdge>,
}

impl ParsedSentence {
    /// Builds a sentence, checking that tokens are numbered `1..=n` in order
    /// and that there is at most one edge per dependent, all within range.
    pub fn new(tokens: Vec<Token>, edges: Vec<DepEdge>) -> Result<Self> {
        for (i, t) in tokens.iter().enumerate() {
            if t.index != i + 1 {
                return Err(CorpusError::InvalidSentence(format!(
                    "token {} found at position {}",
                    t.index,
                    i + 1
                )));
            }
        }
        let n = tokens.len();
        let mut seen = vec![false; n + 1];
        for e in &edges {
            if e.dependent == 0 || e.dependent > n || e.head > n {
                return Err(CorpusError::InvalidSentence(format!(
                    "edge {}({}, {}) out of range for {n} tokens",
                    e.relation, e.head, e.dependent
                )));
            }
            if std::mem::replace(&mut seen[e.dependent], true) {
                return Err(CorpusError::InvalidSentence(format!(
                    "token {} has more than one head",
                    e.dependent
                )));
            }
        }
        Ok(ParsedSentence { tokens, edges })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn edges(&self) -> &[DepEdge] {
        &self.edges
    }

    /// Token by 1-based index.
    pub fn token(&self, index: usize) -> Option<&Token> {
        index.checked_sub(1).and_then(|i| self.tokens.get(i))
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Domain {
    Wiki,
    SE,
    #[default]
    Other,
}

impl FromStr for Domain {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "wiki" | "wikipedia" => Ok(Domain::Wiki),
            "se" | "stackexchange" | "stack-exchange" | "stack_exchange" => Ok(Domain::SE),
            "other" => Ok(Domain::Other),
            other => Err(CorpusError::UnknownDomain(other.to_string())),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Wiki => "wiki",
            Domain::SE => "se",
            Domain::Other => "other",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedRequest {
    pub id: String,
    pub domain: Domain,
    pub sentences: Vec<ParsedSentence>,
    pub metadata: BTreeMap<String, String>,
}

impl ParsedRequest {
    pub fn new(id: impl Into<String>, domain: Domain, sentences: Vec<ParsedSentence>) -> Self {
        ParsedRequest {
            id: id.into(),
            domain,
            sentences,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with_metadata(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.metadata.insert(key.into(), value.into());
        self
    }

    /// Two sentences, the second ending in a question mark.
    pub fn is_canonical(&self) -> bool {
        self.sentences.len() == 2
            && self.sentences[1]
                .tokens()
                .last()
                .is_some_and(|t| t.surface == "?")
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens().iter())
    }

    /// Space-joined surface text, mostly for display.
    pub fn text(&self) -> String {
        self.tokens()
            .map(|t| t.surface.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A request with its human-derived politeness score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredRequest<T: Scalar> {
    pub request: ParsedRequest,
    pub politeness: T,
    /// Set by [`quartile_split`]; Q4 holds the most polite requests.
    pub quartile: Option<Quartile>,
}

impl<T: Scalar> ScoredRequest<T> {
    pub fn new(request: ParsedRequest, politeness: T) -> Self {
        ScoredRequest {
            request,
            politeness,
            quartile: None,
        }
    }
}
