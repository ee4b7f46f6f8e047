use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Result, StrategyError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LexiconName {
    HedgeVerbs,
    PositiveSentiment,
    NegativeSentiment,
}

impl LexiconName {
    pub const ALL: [LexiconName; 3] = [
        LexiconName::HedgeVerbs,
        LexiconName::PositiveSentiment,
        LexiconName::NegativeSentiment,
    ];

    /// File name used inside a lexicon directory.
    pub fn file_name(self) -> &'static str {
        match self {
            LexiconName::HedgeVerbs => "hedges.txt",
            LexiconName::PositiveSentiment => "positive.txt",
            LexiconName::NegativeSentiment => "negative.txt",
        }
    }
}

impl fmt::Display for LexiconName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LexiconName::HedgeVerbs => "hedge verbs",
            LexiconName::PositiveSentiment => "positive sentiment",
            LexiconName::NegativeSentiment => "negative sentiment",
        })
    }
}

/// Lowercased, deduplicated set of terms (single words or phrases).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    name: LexiconName,
    terms: BTreeSet<String>,
}

impl Lexicon {
    pub fn from_terms<I, S>(name: LexiconName, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let terms: BTreeSet<String> = terms
            .into_iter()
            .map(|t| t.as_ref().trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        if terms.is_empty() {
            return Err(StrategyError::EmptyLexicon(name));
        }
        Ok(Lexicon { name, terms })
    }

    /// One term per line; blank lines and lines starting with `#` are ignored.
    pub fn parse(name: LexiconName, text: &str) -> Result<Self> {
        Self::from_terms(
            name,
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        )
    }

    pub fn load(name: LexiconName, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| StrategyError::LexiconIo {
            name,
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(name, &text)
    }

    pub fn name(&self) -> LexiconName {
        self.name
    }

    pub fn contains(&self, term: &str) -> bool {
        self.terms.contains(term)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().map(String::as_str)
    }
}

/// The lexicons the detectors need. Read-only once loaded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicons {
    pub hedges: Lexicon,
    pub positive: Lexicon,
    pub negative: Lexicon,
}

impl Lexicons {
    pub fn get(&self, name: LexiconName) -> &Lexicon {
        match name {
            LexiconName::HedgeVerbs => &self.hedges,
            LexiconName::PositiveSentiment => &self.positive,
            LexiconName::NegativeSentiment => &self.negative,
        }
    }

    /// Loads `hedges.txt`, `positive.txt` and `negative.txt` from `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let paths = LexiconName::ALL
            .iter()
            .map(|&n| (n, dir.join(n.file_name())))
            .collect();
        load_lexicons(&paths)
    }
}

/// Loads every lexicon from an explicit path map; all three must be present.
pub fn load_lexicons(paths: &BTreeMap<LexiconName, PathBuf>) -> Result<Lexicons> {
    let load = |name: LexiconName| -> Result<Lexicon> {
        let path = paths.get(&name).ok_or(StrategyError::MissingLexicon(name))?;
        Lexicon::load(name, path)
    };
    Ok(Lexicons {
        hedges: load(LexiconName::HedgeVerbs)?,
        positive: load(LexiconName::PositiveSentiment)?,
        negative: load(LexiconName::NegativeSentiment)?,
    })
}
