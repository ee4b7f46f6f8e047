use serde::{Deserialize, Serialize};

use super::{ClassifierError, Result};
use crate::Scalar;

/// Sigmoid over the margin: `score = 1 / (1 + exp(-(A·margin + B)))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration<T: Scalar> {
    #[serde(rename = "A", bound = "")]
    pub a: T,
    #[serde(rename = "B", bound = "")]
    pub b: T,
}

impl<T: Scalar> Calibration<T> {
    /// Calibrated probability of the polite class. Kept strictly inside
    /// (0, 1) even where the sigmoid saturates in floating point.
    pub fn score(&self, margin: T) -> T {
        let z = self.a * margin + self.b;
        let s = if z >= T::zero() {
            T::one() / (T::one() + (-z).exp())
        } else {
            let e = z.exp();
            e / (T::one() + e)
        };
        let eps = T::epsilon();
        s.max(eps).min(T::one() - eps)
    }
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Fits the sigmoid to margins and binary labels (true = polite) by
/// regularized Newton iterations with backtracking on the cross-entropy,
/// using the smoothed targets `(N₊+1)/(N₊+2)` and `1/(N₋+2)`.
///
/// Accumulation is done in `f64` whatever the scalar type.
pub fn fit_platt<T: Scalar>(margins: &[T], labels: &[bool]) -> Result<Calibration<T>> {
    if margins.len() != labels.len() {
        return Err(ClassifierError::InvalidConfig(format!(
            "{} margins but {} labels",
            margins.len(),
            labels.len()
        )));
    }
    let n_pos = labels.iter().filter(|&&l| l).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(ClassifierError::SingleClass);
    }
    let f: Vec<f64> = margins.iter().map(|m| m.as_f64()).collect();
    if f.iter().any(|x| !x.is_finite()) {
        return Err(ClassifierError::InvalidConfig("non-finite margin".into()));
    }
    if f.iter().all(|&x| x == f[0]) {
        return Err(ClassifierError::DegenerateCalibration);
    }
    let hi = (n_pos as f64 + 1.0) / (n_pos as f64 + 2.0);
    let lo = 1.0 / (n_neg as f64 + 2.0);
    let t: Vec<f64> = labels.iter().map(|&l| if l { hi } else { lo }).collect();

    let objective = |a: f64, b: f64| -> f64 {
        f.iter()
            .zip(&t)
            .map(|(&fi, &ti)| {
                let z = a * fi + b;
                ti * softplus(-z) + (1.0 - ti) * softplus(z)
            })
            .sum()
    };

    let (mut a, mut b) = (0.0, ((n_pos as f64 + 1.0) / (n_neg as f64 + 1.0)).ln());
    let mut fval = objective(a, b);
    const SIGMA: f64 = 1e-12;
    for _ in 0..100 {
        let (mut ga, mut gb) = (0.0, 0.0);
        let (mut h11, mut h22, mut h21) = (SIGMA, SIGMA, 0.0);
        for (&fi, &ti) in f.iter().zip(&t) {
            let p = sigmoid(a * fi + b);
            let d = p - ti;
            let w = p * (1.0 - p);
            ga += fi * d;
            gb += d;
            h11 += fi * fi * w;
            h22 += w;
            h21 += fi * w;
        }
        if ga.abs() < 1e-12 && gb.abs() < 1e-12 {
            break;
        }
        let det = h11 * h22 - h21 * h21;
        let da = -(h22 * ga - h21 * gb) / det;
        let db = -(-h21 * ga + h11 * gb) / det;
        let slope = ga * da + gb * db;
        let mut step = 1.0;
        let mut improved = false;
        while step >= 1e-12 {
            let (na, nb) = (a + step * da, b + step * db);
            let nf = objective(na, nb);
            if nf <= fval + 1e-4 * step * slope {
                a = na;
                b = nb;
                fval = nf;
                improved = true;
                break;
            }
            step /= 2.0;
        }
        if !improved {
            break;
        }
    }
    // also rejects a NaN slope
    if a.is_nan() || a <= 0.0 {
        return Err(ClassifierError::InvertedCalibration(a));
    }
    Ok(Calibration {
        a: T::lit(a),
        b: T::lit(b),
    })
}
