use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{CorpusError, Result, ScoredRequest};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quartile {
    Q1,
    Q2,
    Q3,
    /// Most polite.
    Q4,
}

impl Quartile {
    pub const ALL: [Quartile; 4] = [Quartile::Q1, Quartile::Q2, Quartile::Q3, Quartile::Q4];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Quartile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.index() + 1)
    }
}

/// One line of the scored-requests JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord<T: Scalar> {
    pub id: String,
    #[serde(bound = "")]
    pub politeness: T,
    pub quartile: Option<Quartile>,
}

/// Quartile of every `(id, score)` item, aligned with the input.
///
/// Items are ranked by score, ties broken by id. Quartile sizes differ by at
/// most one; leftover items go to Q4, then Q1, then Q3.
pub fn assign_quartiles<T: Scalar>(items: &[(&str, T)]) -> Result<Vec<Quartile>> {
    let n = items.len();
    if n < 4 {
        return Err(CorpusError::TooFew { needed: 4, got: n });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        items[a]
            .1
            .partial_cmp(&items[b].1)
            .unwrap_or(Ordering::Equal)
            .then_with(|| items[a].0.cmp(items[b].0))
    });

    let (base, rem) = (n / 4, n % 4);
    let mut sizes = [base; 4];
    for q in [Quartile::Q4, Quartile::Q1, Quartile::Q3].into_iter().take(rem) {
        sizes[q.index()] += 1;
    }

    let mut out = vec![Quartile::Q1; n];
    let mut ranked = order.into_iter();
    for q in Quartile::ALL {
        for idx in ranked.by_ref().take(sizes[q.index()]) {
            out[idx] = q;
        }
    }
    Ok(out)
}

/// Sets the quartile of every request from the corpus-level ranking.
pub fn quartile_split<T: Scalar>(
    mut scored: Vec<ScoredRequest<T>>,
) -> Result<Vec<ScoredRequest<T>>> {
    let items: Vec<(&str, T)> = scored
        .iter()
        .map(|s| (s.request.id.as_str(), s.politeness))
        .collect();
    let quartiles = assign_quartiles(&items)?;
    for (s, q) in scored.iter_mut().zip(quartiles) {
        s.quartile = Some(q);
    }
    Ok(scored)
}
