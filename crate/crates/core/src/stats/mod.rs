//! Nonparametric tests and the reports built on them.

mod binomial;
mod groups;
mod mann_whitney;
mod normal;
mod rank;
mod table;
mod wilcoxon;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use binomial::{binomial_pmf, binomial_test};
pub use groups::{
    group_compare, group_comparison_csv, GroupComparison, GroupItem, GroupStats, Reference, ScoreKind,
};
pub use mann_whitney::mann_whitney_u;
pub use rank::midranks;
pub use table::{sig, strategy_table, strategy_table_csv, StrategyRow, TOP_QUARTILE_BASELINE};
pub use wilcoxon::wilcoxon_signed_rank;

use crate::corpus::CorpusError;
use crate::num::mean;
use crate::Scalar;

/// Largest total sample size for which rank tests enumerate the exact null
/// distribution.
pub const EXACT_MAX_N: usize = 12;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("empty sample")]
    EmptySample,
    #[error("samples differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("degenerate pairing: all differences are zero")]
    DegeneratePairing,
    #[error("zero variance")]
    ZeroVariance,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unknown group key {0:?}")]
    UnknownGroupKey(String),
    #[error("reference group {0:?} has no members")]
    UnknownReference(String),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
}

pub type Result<T, E = StatsError> = std::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    MannWhitneyU,
    WilcoxonSignedRank,
    BinomialExact,
    Pearson,
}

/// Alternative hypothesis. `Greater` means the first sample (or the
/// observed proportion) tends to be larger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    Two,
    Greater,
    Less,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult<T: Scalar> {
    pub method: Method,
    pub sidedness: Sidedness,
    #[serde(bound = "")]
    pub statistic: T,
    /// In [0, 1]. Unset for a plain correlation coefficient.
    #[serde(bound = "")]
    pub p_value: Option<T>,
    pub n: Vec<usize>,
    /// Whether the p-value comes from the exact null distribution.
    pub exact: bool,
}

impl<T: Scalar> TestResult<T> {
    pub fn stars(&self) -> &'static str {
        self.p_value.map_or("", |p| stars(p.as_f64()))
    }
}

/// Significance marker at the 0.05 / 0.01 / 0.001 levels.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

impl fmt::Display for Sidedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sidedness::Two => "two-sided",
            Sidedness::Greater => "greater",
            Sidedness::Less => "less",
        })
    }
}

/// Pearson correlation coefficient; `None` for mismatched or too short
/// inputs and for zero-variance vectors.
pub fn pearson_r<T: Scalar>(x: &[T], y: &[T]) -> Option<T> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (mx, my) = (mean(x)?, mean(y)?);
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx <= T::zero() || syy <= T::zero() {
        return None;
    }
    let r = sxy / (sxx * syy).sqrt();
    Some(r.max(-T::one()).min(T::one()))
}

/// Pearson correlation as a [`TestResult`] (statistic = r, no p-value).
pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<TestResult<T>> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(StatsError::InvalidArgument(
            "pearson needs at least two points".into(),
        ));
    }
    let r = pearson_r(x, y).ok_or(StatsError::ZeroVariance)?;
    Ok(TestResult {
        method: Method::Pearson,
        sidedness: Sidedness::Two,
        statistic: r,
        p_value: None,
        n: vec![x.len()],
        exact: true,
    })
}
