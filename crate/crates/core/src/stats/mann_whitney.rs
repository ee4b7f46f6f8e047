use super::normal::approx_p;
use super::rank::{doubled_midranks, tie_term};
use super::{Method, Result, Sidedness, StatsError, TestResult, EXACT_MAX_N};
use crate::Scalar;

/// Counts of a doubled-integer statistic at least as extreme as the observed
/// one over an enumerated null distribution.
pub(crate) fn exact_tail(
    null: impl Iterator<Item = u64>,
    observed: u64,
    twice_null_mean: u64,
    side: Sidedness,
) -> f64 {
    let (mut hits, mut total) = (0u64, 0u64);
    // compare 2*s against 2*mean to stay in integers
    let obs_dev = (2 * observed).abs_diff(twice_null_mean);
    for s in null {
        total += 1;
        let extreme = match side {
            Sidedness::Greater => s >= observed,
            Sidedness::Less => s <= observed,
            Sidedness::Two => (2 * s).abs_diff(twice_null_mean) >= obs_dev,
        };
        hits += u64::from(extreme);
    }
    hits as f64 / total as f64
}

/// Mann-Whitney U test of `a` against `b`; the statistic is U for `a`.
///
/// Ties get midranks. For `a.len() + b.len() <= 12` the p-value comes from
/// enumerating every assignment of the pooled ranks to the two groups;
/// larger samples use the tie-corrected normal approximation with
/// continuity correction.
pub fn mann_whitney_u<T: Scalar>(a: &[T], b: &[T], side: Sidedness) -> Result<TestResult<T>> {
    if a.is_empty() || b.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let (na, nb) = (a.len(), b.len());
    let n = na + nb;
    let pooled: Vec<T> = a.iter().chain(b).copied().collect();
    if pooled.iter().any(|v| !v.is_finite()) {
        return Err(StatsError::InvalidArgument("non-finite observation".into()));
    }
    let (ranks, ties) = doubled_midranks(&pooled);

    // 2U = 2R - na(na+1)
    let offset = (na * (na + 1)) as u64;
    let rank_sum2: u64 = ranks[..na].iter().sum();
    let u2 = rank_sum2 - offset;
    let u = u2 as f64 / 2.0;
    // mean of 2U is na*nb
    let doubled_mean = (na * nb) as u64;

    let (p, exact) = if n <= EXACT_MAX_N {
        let null = (0u32..(1 << n))
            .filter(|m| m.count_ones() as usize == na)
            .map(|mask| {
                let r: u64 = (0..n)
                    .filter(|i| mask & (1 << i) != 0)
                    .map(|i| ranks[i])
                    .sum();
                r - offset
            });
        (exact_tail(null, u2, 2 * doubled_mean, side), true)
    } else {
        let (naf, nbf, nf) = (na as f64, nb as f64, n as f64);
        let var = naf * nbf / 12.0 * ((nf + 1.0) - tie_term(&ties) / (nf * (nf - 1.0)));
        (approx_p(u, naf * nbf / 2.0, var, side), false)
    };

    Ok(TestResult {
        method: Method::MannWhitneyU,
        sidedness: side,
        statistic: T::lit(u),
        p_value: Some(T::lit(p.min(1.0))),
        n: vec![na, nb],
        exact,
    })
}
