use statrs::distribution::{ContinuousCDF, Normal};

use super::Sidedness;

fn standard() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// Normal-approximation p-value for a statistic with the given null mean and
/// variance, with a continuity correction of 0.5.
pub(crate) fn approx_p(statistic: f64, mean: f64, variance: f64, side: Sidedness) -> f64 {
    if variance <= 0.0 {
        return 1.0;
    }
    let sd = variance.sqrt();
    let n = standard();
    let p = match side {
        Sidedness::Greater => n.sf((statistic - mean - 0.5) / sd),
        Sidedness::Less => n.cdf((statistic - mean + 0.5) / sd),
        Sidedness::Two => {
            let z = ((statistic - mean).abs() - 0.5).max(0.0) / sd;
            2.0 * n.sf(z)
        }
    };
    p.clamp(0.0, 1.0)
}
