use super::mann_whitney::exact_tail;
use super::normal::approx_p;
use super::rank::{doubled_midranks, tie_term};
use super::{Method, Result, Sidedness, StatsError, TestResult, EXACT_MAX_N};
use crate::Scalar;

/// Wilcoxon signed-rank test on the paired differences `a - b`; the
/// statistic is the sum of ranks of the positive differences.
///
/// Zero differences are dropped. With at most 12 nonzero differences the
/// p-value enumerates all sign assignments; otherwise the tie-corrected
/// normal approximation with continuity correction is used.
pub fn wilcoxon_signed_rank<T: Scalar>(a: &[T], b: &[T], side: Sidedness) -> Result<TestResult<T>> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let diffs: Vec<T> = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| x - y)
        .filter(|d| !d.is_zero())
        .collect();
    if diffs.iter().any(|d| !d.is_finite()) {
        return Err(StatsError::InvalidArgument("non-finite observation".into()));
    }
    if diffs.is_empty() {
        return Err(StatsError::DegeneratePairing);
    }
    let n = diffs.len();
    let abs: Vec<T> = diffs.iter().map(|d| d.abs()).collect();
    let (ranks, ties) = doubled_midranks(&abs);
    let w2: u64 = diffs
        .iter()
        .zip(&ranks)
        .filter(|(d, _)| **d > T::zero())
        .map(|(_, r)| r)
        .sum();
    // sum of all doubled ranks is n(n+1), so the doubled mean of W+ is n(n+1)/2
    let total2: u64 = ranks.iter().sum();

    let (p, exact) = if n <= EXACT_MAX_N {
        let null = (0u32..(1 << n)).map(|mask| {
            (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| ranks[i])
                .sum::<u64>()
        });
        (exact_tail(null, w2, total2, side), true)
    } else {
        let nf = n as f64;
        let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term(&ties) / 48.0;
        (approx_p(w2 as f64 / 2.0, nf * (nf + 1.0) / 4.0, var, side), false)
    };

    Ok(TestResult {
        method: Method::WilcoxonSignedRank,
        sidedness: side,
        statistic: T::lit(w2 as f64 / 2.0),
        p_value: Some(T::lit(p.min(1.0))),
        n: vec![n],
        exact,
    })
}
