use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::table::TOP_QUARTILE_BASELINE;
use super::{binomial_test, mann_whitney_u, Result, Sidedness, StatsError, TestResult};
use crate::corpus::{assign_quartiles, Diagnostic, ParsedRequest, Quartile};
use crate::num::mean;
use crate::Scalar;

/// A scored request reduced to what a group comparison needs.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupItem<T: Scalar> {
    pub id: String,
    pub group: Option<String>,
    pub score: T,
}

impl<T: Scalar> GroupItem<T> {
    pub fn from_request(request: &ParsedRequest, key: &str, score: T) -> Self {
        GroupItem {
            id: request.id.clone(),
            group: request.metadata.get(key).cloned(),
            score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Each group is tested against all other analyzed requests.
    Complement,
    /// Each group is tested against the named group.
    Group(String),
}

/// Whether scores are human annotations or calibrated classifier output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreKind {
    Human,
    Predicted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupStats<T: Scalar> {
    pub n: usize,
    #[serde(bound = "")]
    pub mean_politeness: T,
    #[serde(bound = "")]
    pub top_quartile_pct: T,
    /// U test of this group's scores against the reference.
    #[serde(bound = "")]
    pub vs_reference: Option<TestResult<T>>,
    /// Binomial test of top-quartile membership against 25%.
    #[serde(bound = "")]
    pub quartile_test: TestResult<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupComparison<T: Scalar> {
    pub key: String,
    pub score_kind: ScoreKind,
    pub reference: Reference,
    /// Requests that carried the grouping key; the group sizes sum to this.
    pub total: usize,
    #[serde(bound = "")]
    pub groups: BTreeMap<String, GroupStats<T>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Compares politeness across the groups given by a metadata key.
///
/// Quartiles are computed over the analyzed population (the items carrying
/// the key), so top-quartile membership is relative to that population.
pub fn group_compare<T: Scalar>(
    items: &[GroupItem<T>],
    key: &str,
    reference: Reference,
    score_kind: ScoreKind,
) -> Result<GroupComparison<T>> {
    let mut diagnostics = Vec::new();
    let mut analyzed: Vec<(&str, &str, T)> = items
        .iter()
        .filter_map(|it| it.group.as_deref().map(|g| (it.id.as_str(), g, it.score)))
        .collect();
    let missing = items.len() - analyzed.len();
    if analyzed.is_empty() {
        return Err(StatsError::UnknownGroupKey(key.to_string()));
    }
    if missing > 0 {
        diagnostics.push(Diagnostic::new(
            format!("key {key}"),
            format!("{missing} requests lack the key and were excluded"),
        ));
    }
    // id order makes every sum independent of input order
    analyzed.sort_by(|a, b| a.0.cmp(b.0));

    let pairs: Vec<(&str, T)> = analyzed.iter().map(|&(id, _, s)| (id, s)).collect();
    let quartiles = assign_quartiles(&pairs)?;

    let mut members: BTreeMap<&str, Vec<(T, Quartile)>> = BTreeMap::new();
    for (&(_, g, s), &q) in analyzed.iter().zip(&quartiles) {
        members.entry(g).or_default().push((s, q));
    }
    if let Reference::Group(name) = &reference {
        if !members.contains_key(name.as_str()) {
            return Err(StatsError::UnknownReference(name.clone()));
        }
    }

    let mut groups = BTreeMap::new();
    for (&g, rows) in &members {
        let scores: Vec<T> = rows.iter().map(|r| r.0).collect();
        let top = rows.iter().filter(|r| r.1 == Quartile::Q4).count();
        let reference_scores: Vec<T> = match &reference {
            Reference::Complement => analyzed
                .iter()
                .filter(|a| a.1 != g)
                .map(|a| a.2)
                .collect(),
            Reference::Group(name) if name == g => Vec::new(),
            Reference::Group(name) => members[name.as_str()].iter().map(|r| r.0).collect(),
        };
        let vs_reference = if reference_scores.is_empty() {
            None
        } else {
            Some(mann_whitney_u(&scores, &reference_scores, Sidedness::Two)?)
        };
        let n = scores.len();
        groups.insert(
            g.to_string(),
            GroupStats {
                n,
                mean_politeness: mean(&scores).expect("non-empty group"),
                top_quartile_pct: T::lit(100.0) * T::from_usize_lossy(top) / T::from_usize_lossy(n),
                vs_reference,
                quartile_test: binomial_test(top as u64, n as u64, TOP_QUARTILE_BASELINE, Sidedness::Two)?,
            },
        );
    }

    Ok(GroupComparison {
        key: key.to_string(),
        score_kind,
        reference,
        total: analyzed.len(),
        groups,
        diagnostics,
    })
}

/// CSV rendering of a comparison, one line per group.
pub fn group_comparison_csv<T: Scalar>(cmp: &GroupComparison<T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "group",
        "n",
        "mean_politeness",
        "u_statistic",
        "p_vs_reference",
        "sig_vs_reference",
        "top_quartile_pct",
        "top_quartile_p",
        "top_quartile_sig",
    ])
    .expect("in-memory write");
    for (g, s) in &cmp.groups {
        let (u, p, sig) = match &s.vs_reference {
            Some(t) => (
                t.statistic.to_string(),
                t.p_value.map(|p| p.to_string()).unwrap_or_default(),
                t.stars().to_string(),
            ),
            None => Default::default(),
        };
        w.write_record([
            g.clone(),
            s.n.to_string(),
            s.mean_politeness.to_string(),
            u,
            p,
            sig,
            s.top_quartile_pct.to_string(),
            s.quartile_test.p_value.map(|p| p.to_string()).unwrap_or_default(),
            s.quartile_test.stars().to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}
