use serde::Serialize;

use super::{binomial_test, mann_whitney_u, stars, Result, Sidedness, StatsError, TestResult};
use crate::corpus::{Quartile, ScoredRequest};
use crate::num::mean;
use crate::strategies::{Strategy, StrategyProfile};
use crate::Scalar;

/// Share of a random sample expected in the top quartile.
pub const TOP_QUARTILE_BASELINE: f64 = 0.25;

/// One strategy's relation to human politeness scores.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyRow<T: Scalar> {
    pub strategy: Strategy,
    pub n_matching: usize,
    /// Mean politeness of requests exhibiting the strategy.
    #[serde(bound = "")]
    pub mean_politeness: Option<T>,
    /// U test of exhibiting vs. remaining requests.
    #[serde(bound = "")]
    pub politeness_p: Option<TestResult<T>>,
    /// Percentage of exhibiting requests in the top quartile.
    #[serde(bound = "")]
    pub top_quartile_pct: Option<T>,
    /// Binomial test of top-quartile membership against 25%.
    #[serde(bound = "")]
    pub quartile_p: Option<TestResult<T>>,
}

/// Builds one row per strategy from quartile-assigned scored requests and
/// their profiles (aligned by position).
pub fn strategy_table<T: Scalar>(
    scored: &[ScoredRequest<T>],
    profiles: &[StrategyProfile],
) -> Result<Vec<StrategyRow<T>>> {
    if scored.len() != profiles.len() {
        return Err(StatsError::LengthMismatch(scored.len(), profiles.len()));
    }
    let quartiles: Vec<Quartile> = scored
        .iter()
        .map(|s| {
            s.quartile.ok_or_else(|| {
                StatsError::InvalidArgument(format!("request {} has no quartile", s.request.id))
            })
        })
        .collect::<Result<_>>()?;

    Strategy::ALL
        .iter()
        .map(|&strategy| {
            let (mut with, mut without) = (Vec::new(), Vec::new());
            let mut in_top = 0u64;
            for ((s, p), q) in scored.iter().zip(profiles).zip(&quartiles) {
                if p.get(strategy) {
                    with.push(s.politeness);
                    in_top += u64::from(*q == Quartile::Q4);
                } else {
                    without.push(s.politeness);
                }
            }
            let n = with.len();
            if n == 0 {
                return Ok(StrategyRow {
                    strategy,
                    n_matching: 0,
                    mean_politeness: None,
                    politeness_p: None,
                    top_quartile_pct: None,
                    quartile_p: None,
                });
            }
            let politeness_p = if without.is_empty() {
                None
            } else {
                Some(mann_whitney_u(&with, &without, Sidedness::Two)?)
            };
            Ok(StrategyRow {
                strategy,
                n_matching: n,
                mean_politeness: mean(&with),
                politeness_p,
                top_quartile_pct: Some(
                    T::lit(100.0) * T::lit(in_top as f64) / T::from_usize_lossy(n),
                ),
                quartile_p: Some(binomial_test(
                    in_top,
                    n as u64,
                    TOP_QUARTILE_BASELINE,
                    Sidedness::Two,
                )?),
            })
        })
        .collect()
}

fn fmt_opt<T: Scalar>(v: Option<T>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

fn test_cells<T: Scalar>(t: &Option<TestResult<T>>) -> [String; 3] {
    match t {
        Some(t) => [
            format!("{}", t.statistic),
            fmt_opt(t.p_value),
            t.stars().to_string(),
        ],
        None => Default::default(),
    }
}

/// CSV rendering: one line per strategy with n, statistics, p-values and
/// significance stars.
pub fn strategy_table_csv<T: Scalar>(rows: &[StrategyRow<T>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "strategy",
        "n",
        "mean_politeness",
        "u_statistic",
        "politeness_p",
        "politeness_sig",
        "top_quartile_pct",
        "top_quartile_k",
        "top_quartile_p",
        "top_quartile_sig",
    ])
    .expect("in-memory write");
    for r in rows {
        let [u, up, us] = test_cells(&r.politeness_p);
        let [k, qp, qs] = test_cells(&r.quartile_p);
        w.write_record([
            r.strategy.label().to_string(),
            r.n_matching.to_string(),
            fmt_opt(r.mean_politeness),
            u,
            up,
            us,
            fmt_opt(r.top_quartile_pct),
            k,
            qp,
            qs,
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

/// Significance stars of an optional test, for display.
pub fn sig<T: Scalar>(t: &Option<TestResult<T>>) -> &'static str {
    t.as_ref().and_then(|t| t.p_value).map_or("", |p| stars(p.as_f64()))
}
