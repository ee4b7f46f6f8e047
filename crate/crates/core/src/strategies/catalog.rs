//! Per-strategy matcher definitions.
//!
//! Hedges are detected from a nominal-subject edge leaving a hedge verb.
//! The other nineteen matchers are lexical patterns reconstructed from one
//! example sentence each; every definition is plain data so alternates can
//! be supplied through [`Catalog::new`] (or a JSON document) without
//! touching the detector.

use serde::{Deserialize, Serialize};

use super::lexicon::{LexiconName, Lexicons};
use super::{Result, Strategy, StrategyError};
use crate::corpus::ParsedSentence;

/// Which dependency labels count as a nominal subject.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseScheme {
    /// `nsubj` and its subtypes (`nsubj:pass`, ...).
    Universal,
    /// Legacy Stanford labels: `nsubj`, `nsubjpass`.
    Stanford,
    /// Any label starting with `nsubj`.
    #[default]
    Any,
}

impl ParseScheme {
    pub fn is_nominal_subject(self, label: &str) -> bool {
        let label = label.to_ascii_lowercase();
        match self {
            ParseScheme::Universal => label == "nsubj" || label.starts_with("nsubj:"),
            ParseScheme::Stanford => label == "nsubj" || label == "nsubjpass",
            ParseScheme::Any => label.starts_with("nsubj"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Position {
    /// First token of a sentence.
    Initial,
    NonInitial,
    Anywhere,
}

impl Position {
    fn admits(self, index: usize) -> bool {
        match self {
            Position::Initial => index == 0,
            Position::NonInitial => index > 0,
            Position::Anywhere => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Surface,
    Lemma,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Matcher {
    /// A single token whose lowercased field is one of `terms`.
    Word {
        field: Field,
        terms: Vec<String>,
        position: Position,
    },
    /// Contiguous lowercased surface tokens spelling one of `phrases`.
    Phrase {
        phrases: Vec<String>,
        position: Position,
    },
    /// A token lemma listed in a lexicon.
    LexiconLemma { lexicon: LexiconName },
    /// A nominal-subject edge whose head lemma is listed in a lexicon.
    SubjectOfLexiconHead { lexicon: LexiconName },
    /// A nominal-subject edge from one of `heads` (lemma) to one of
    /// `subjects` (lowercased surface).
    SubjectPair {
        heads: Vec<String>,
        subjects: Vec<String>,
    },
    /// Adjacent tokens: surface in `first`, then surface in `second`.
    Bigram { first: Vec<String>, second: Vec<String> },
    AnyOf { matchers: Vec<Matcher> },
}

/// Lowercased view of a sentence.
pub(crate) struct SentenceView<'a> {
    sentence: &'a ParsedSentence,
    surfaces: Vec<String>,
    lemmas: Vec<String>,
}

impl<'a> SentenceView<'a> {
    pub(crate) fn new(sentence: &'a ParsedSentence) -> Self {
        SentenceView {
            sentence,
            surfaces: sentence.tokens().iter().map(|t| t.surface.to_lowercase()).collect(),
            lemmas: sentence.tokens().iter().map(|t| t.lemma.to_lowercase()).collect(),
        }
    }

    fn field(&self, field: Field) -> &[String] {
        match field {
            Field::Surface => &self.surfaces,
            Field::Lemma => &self.lemmas,
        }
    }

    fn subject_edges(&self, scheme: ParseScheme) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sentence
            .edges()
            .iter()
            .filter(move |e| e.head > 0 && scheme.is_nominal_subject(&e.relation))
            .map(|e| (e.head - 1, e.dependent - 1))
    }
}

fn contains(terms: &[String], word: &str) -> bool {
    terms.iter().any(|t| t == word)
}

impl Matcher {
    pub(crate) fn matches(&self, view: &SentenceView<'_>, lexicons: &Lexicons, scheme: ParseScheme) -> bool {
        match self {
            Matcher::Word {
                field,
                terms,
                position,
            } => view
                .field(*field)
                .iter()
                .enumerate()
                .any(|(i, w)| position.admits(i) && contains(terms, w)),
            Matcher::Phrase { phrases, position } => phrases.iter().any(|phrase| {
                let words: Vec<&str> = phrase.split_whitespace().collect();
                if words.is_empty() || words.len() > view.surfaces.len() {
                    return false;
                }
                (0..=view.surfaces.len() - words.len())
                    .filter(|&i| position.admits(i))
                    .any(|i| {
                        view.surfaces[i..i + words.len()]
                            .iter()
                            .zip(&words)
                            .all(|(a, b)| a == b)
                    })
            }),
            Matcher::LexiconLemma { lexicon } => {
                let lex = lexicons.get(*lexicon);
                view.lemmas.iter().any(|l| lex.contains(l))
            }
            Matcher::SubjectOfLexiconHead { lexicon } => {
                let lex = lexicons.get(*lexicon);
                view.subject_edges(scheme)
                    .any(|(head, _)| lex.contains(&view.lemmas[head]))
            }
            Matcher::SubjectPair { heads, subjects } => view
                .subject_edges(scheme)
                .any(|(h, d)| contains(heads, &view.lemmas[h]) && contains(subjects, &view.surfaces[d])),
            Matcher::Bigram { first, second } => view
                .surfaces
                .windows(2)
                .any(|w| contains(first, &w[0]) && contains(second, &w[1])),
            Matcher::AnyOf { matchers } => matchers.iter().any(|m| m.matches(view, lexicons, scheme)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StrategyDef {
    pub strategy: Strategy,
    pub description: String,
    pub matcher: Matcher,
}

/// Exactly one matcher definition per strategy, in [`Strategy::ALL`] order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Catalog {
    defs: Vec<StrategyDef>,
}

fn strings(words: &[&str]) -> Vec<String> {
    words.iter().map(|w| w.to_string()).collect()
}

fn word(field: Field, terms: &[&str], position: Position) -> Matcher {
    Matcher::Word {
        field,
        terms: strings(terms),
        position,
    }
}

fn phrase(phrases: &[&str], position: Position) -> Matcher {
    Matcher::Phrase {
        phrases: strings(phrases),
        position,
    }
}

const FIRST_PERSON: &[&str] = &["i", "my", "mine", "myself"];
const FIRST_PERSON_PLURAL: &[&str] = &["we", "us", "our", "ours", "ourselves"];
const SECOND_PERSON: &[&str] = &["you", "your", "yours", "yourself"];
const DEFERENCE: &[&str] = &["great", "good", "nice", "interesting", "cool", "excellent", "awesome"];

impl Catalog {
    pub fn new(mut defs: Vec<StrategyDef>) -> Result<Self> {
        defs.sort_by_key(|d| d.strategy);
        for (expected, def) in Strategy::ALL.iter().zip(&defs) {
            if def.strategy != *expected {
                return Err(StrategyError::IncompleteCatalog(*expected));
            }
        }
        if defs.len() != Strategy::COUNT {
            let missing = Strategy::ALL
                .get(defs.len())
                .copied()
                .unwrap_or(Strategy::Factuality);
            return Err(StrategyError::IncompleteCatalog(missing));
        }
        Ok(Catalog { defs })
    }

    /// The default matcher for every strategy.
    pub fn standard() -> Self {
        use Field::{Lemma, Surface};
        use Position::{Anywhere, Initial, NonInitial};
        let def = |strategy, description: &str, matcher| StrategyDef {
            strategy,
            description: description.to_string(),
            matcher,
        };
        let defs = vec![
            def(
                Strategy::Gratitude,
                "lemma thank(s), or appreciate with a first-person nominal subject",
                Matcher::AnyOf {
                    matchers: vec![
                        word(Lemma, &["thank", "thanks"], Anywhere),
                        Matcher::SubjectPair {
                            heads: strings(&["appreciate"]),
                            subjects: strings(&["i", "we"]),
                        },
                    ],
                },
            ),
            def(
                Strategy::Deference,
                "sentence-initial positive adjective, or initial good/nice/great job/work",
                Matcher::AnyOf {
                    matchers: vec![
                        word(Surface, DEFERENCE, Initial),
                        phrase(
                            &["good job", "good work", "nice job", "nice work", "great job", "great work"],
                            Initial,
                        ),
                    ],
                },
            ),
            def(
                Strategy::Greeting,
                "sentence-initial greeting word",
                word(Surface, &["hey", "hi", "hello", "greetings"], Initial),
            ),
            def(
                Strategy::PositiveLexicon,
                "any lemma in the positive sentiment lexicon",
                Matcher::LexiconLemma {
                    lexicon: LexiconName::PositiveSentiment,
                },
            ),
            def(
                Strategy::NegativeLexicon,
                "any lemma in the negative sentiment lexicon",
                Matcher::LexiconLemma {
                    lexicon: LexiconName::NegativeSentiment,
                },
            ),
            def(
                Strategy::Apologizing,
                "apology lemma or apology phrase",
                Matcher::AnyOf {
                    matchers: vec![
                        word(Lemma, &["sorry", "apologize", "oops", "whoops"], Anywhere),
                        phrase(&["excuse me", "forgive me", "i apologize"], Anywhere),
                    ],
                },
            ),
            def(
                Strategy::Please,
                "please, not sentence-initial",
                word(Surface, &["please"], NonInitial),
            ),
            def(
                Strategy::PleaseStart,
                "sentence-initial please",
                word(Surface, &["please"], Initial),
            ),
            def(
                Strategy::IndirectBtw,
                "sentence-initial \"by the way\"",
                phrase(&["by the way"], Initial),
            ),
            def(
                Strategy::DirectQuestion,
                "sentence-initial wh-word",
                word(
                    Surface,
                    &["what", "why", "who", "how", "which", "where", "when"],
                    Initial,
                ),
            ),
            def(
                Strategy::DirectStart,
                "sentence-initial conjunction or so/then",
                word(Surface, &["so", "then", "and", "but", "or"], Initial),
            ),
            def(
                Strategy::CounterfactualModal,
                "could/would followed by you",
                Matcher::Bigram {
                    first: strings(&["could", "would"]),
                    second: strings(&["you"]),
                },
            ),
            def(
                Strategy::IndicativeModal,
                "can/will followed by you",
                Matcher::Bigram {
                    first: strings(&["can", "will"]),
                    second: strings(&["you"]),
                },
            ),
            def(
                Strategy::FirstPersonStart,
                "sentence-initial first-person singular pronoun",
                word(Surface, FIRST_PERSON, Initial),
            ),
            def(
                Strategy::FirstPersonPlural,
                "first-person plural pronoun anywhere",
                word(Surface, FIRST_PERSON_PLURAL, Anywhere),
            ),
            def(
                Strategy::FirstPerson,
                "first-person singular pronoun, not sentence-initial",
                word(Surface, FIRST_PERSON, NonInitial),
            ),
            def(
                Strategy::SecondPerson,
                "second-person pronoun, not sentence-initial",
                word(Surface, SECOND_PERSON, NonInitial),
            ),
            def(
                Strategy::SecondPersonStart,
                "sentence-initial second-person pronoun",
                word(Surface, SECOND_PERSON, Initial),
            ),
            def(
                Strategy::Hedges,
                "nominal subject edge whose head lemma is a hedge verb",
                Matcher::SubjectOfLexiconHead {
                    lexicon: LexiconName::HedgeVerbs,
                },
            ),
            def(
                Strategy::Factuality,
                "factuality phrase or adverb",
                Matcher::AnyOf {
                    matchers: vec![
                        phrase(&["in fact", "the point", "the reality", "the truth"], Anywhere),
                        word(Surface, &["really", "actually", "honestly", "surely"], Anywhere),
                    ],
                },
            ),
        ];
        Catalog::new(defs).expect("standard catalog is complete")
    }

    pub fn defs(&self) -> &[StrategyDef] {
        &self.defs
    }

    pub fn get(&self, strategy: Strategy) -> &StrategyDef {
        &self.defs[strategy.index()]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("catalog serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let catalog: Catalog =
            serde_json::from_str(text).map_err(|e| StrategyError::InvalidCatalog(e.to_string()))?;
        Catalog::new(catalog.defs)
    }
}

impl Default for Catalog {
    fn default() -> Self {
        Catalog::standard()
    }
}

/// True iff some nominal-subject edge has a head whose lemma is in the hedge
/// lexicon.
pub fn match_hedges(sentence: &ParsedSentence, hedges: &super::Lexicon, scheme: ParseScheme) -> bool {
    sentence.edges().iter().any(|e| {
        scheme.is_nominal_subject(&e.relation)
            && sentence
                .token(e.head)
                .is_some_and(|t| hedges.contains(&t.lemma.to_lowercase()))
    })
}
