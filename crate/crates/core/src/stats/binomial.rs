use statrs::function::gamma::ln_gamma;

use super::{Method, Result, Sidedness, StatsError, TestResult};
use crate::Scalar;

/// Binomial probability mass P(X = k) for X ~ Bin(n, p).
pub fn binomial_pmf(k: u64, n: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if p == 0.0 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    if p == 1.0 {
        return if k == n { 1.0 } else { 0.0 };
    }
    let (kf, nf) = (k as f64, n as f64);
    let ln_choose = ln_gamma(nf + 1.0) - ln_gamma(kf + 1.0) - ln_gamma(nf - kf + 1.0);
    (ln_choose + kf * p.ln() + (nf - kf) * (-p).ln_1p()).exp()
}

/// Exact binomial test of `k` successes in `n` trials against success
/// probability `p0`. The two-sided p-value sums every outcome no more likely
/// than the observed one.
pub fn binomial_test<T: Scalar>(k: u64, n: u64, p0: f64, side: Sidedness) -> Result<TestResult<T>> {
    if k > n {
        return Err(StatsError::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    if !(p0 > 0.0 && p0 < 1.0) {
        return Err(StatsError::InvalidArgument(format!("p0 = {p0} outside (0, 1)")));
    }
    let pmf = |i: u64| binomial_pmf(i, n, p0);
    let p = match side {
        Sidedness::Greater if k == 0 => 1.0,
        Sidedness::Less if k == n => 1.0,
        Sidedness::Greater => (k..=n).map(pmf).sum(),
        Sidedness::Less => (0..=k).map(pmf).sum(),
        Sidedness::Two => {
            let observed = pmf(k) * (1.0 + 1e-7);
            (0..=n).map(pmf).filter(|&d| d <= observed).sum()
        }
    };
    Ok(TestResult {
        method: Method::BinomialExact,
        sidedness: side,
        statistic: T::lit(k as f64),
        p_value: Some(T::lit(f64::min(p, 1.0))),
        n: vec![n as usize],
        exact: true,
    })
}
