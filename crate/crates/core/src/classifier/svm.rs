use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Class, ClassifierError, FeatureVector, Result};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmConfig {
    /// Hinge-loss weight against the L2 penalty.
    pub c: f64,
    /// Stop once the spread of projected dual gradients falls below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    /// Seed of the coordinate visiting order.
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        SvmConfig {
            c: 1.0,
            tolerance: 1e-6,
            max_epochs: 20_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmSolution<T: Scalar> {
    pub weights: Vec<T>,
    pub bias: T,
    pub epochs: usize,
    pub converged: bool,
}

impl<T: Scalar> SvmSolution<T> {
    pub fn margin(&self, x: &FeatureVector<T>) -> T {
        x.dot(&self.weights) + self.bias
    }
}

/// Primal objective `0.5 (|w|² + b²) + C Σ max(0, 1 - y (w·x + b))`.
/// The bias is regularized like any other weight.
pub fn svm_objective<T: Scalar>(
    weights: &[T],
    bias: T,
    examples: &[(FeatureVector<T>, Class)],
    c: f64,
) -> T {
    let reg = weights.iter().fold(bias * bias, |acc, &w| acc + w * w);
    let loss = examples.iter().fold(T::zero(), |acc, (x, y)| {
        let m = T::lit(y.sign()) * (x.dot(weights) + bias);
        acc + (T::one() - m).max(T::zero())
    });
    T::lit(0.5) * reg + T::lit(c) * loss
}

/// Trains an L2-regularized hinge-loss linear classifier by dual coordinate
/// descent. The bias is handled as the weight of a constant feature.
pub fn train_svm<T: Scalar>(
    examples: &[(FeatureVector<T>, Class)],
    dim: usize,
    config: &SvmConfig,
) -> Result<SvmSolution<T>> {
    if examples.is_empty() {
        return Err(ClassifierError::EmptyTrainingSet);
    }
    if !(config.c > 0.0 && config.c.is_finite()) {
        return Err(ClassifierError::InvalidConfig(format!(
            "regularization C must be positive, got {}",
            config.c
        )));
    }
    if let Some((x, _)) = examples.iter().find(|(x, _)| x.dim() != dim) {
        return Err(ClassifierError::DimensionMismatch {
            expected: dim,
            got: x.dim(),
        });
    }
    let first = examples[0].1;
    if examples.iter().all(|(_, y)| *y == first) {
        return Err(ClassifierError::SingleClass);
    }

    let c = T::lit(config.c);
    let tol = T::lit(config.tolerance.max(100.0 * T::epsilon().as_f64()));
    let n = examples.len();
    let y: Vec<T> = examples.iter().map(|(_, y)| T::lit(y.sign())).collect();
    // diagonal of the kernel matrix, +1 for the constant bias feature
    let q: Vec<T> = examples
        .iter()
        .map(|(x, _)| x.squared_norm() + T::one())
        .collect();
    let mut alpha = vec![T::zero(); n];
    let mut w = vec![T::zero(); dim];
    let mut b = T::zero();
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut epochs = 0;
    let mut converged = false;
    while epochs < config.max_epochs {
        epochs += 1;
        order.shuffle(&mut rng);
        let (mut pg_max, mut pg_min) = (T::neg_infinity(), T::infinity());
        for &i in &order {
            let (x, _) = &examples[i];
            let g = y[i] * (x.dot(&w) + b) - T::one();
            let pg = if alpha[i] <= T::zero() {
                g.min(T::zero())
            } else if alpha[i] >= c {
                g.max(T::zero())
            } else {
                g
            };
            pg_max = pg_max.max(pg);
            pg_min = pg_min.min(pg);
            if pg != T::zero() {
                let old = alpha[i];
                alpha[i] = (old - g / q[i]).max(T::zero()).min(c);
                let step = (alpha[i] - old) * y[i];
                if step != T::zero() {
                    for &(j, v) in x.entries() {
                        w[j] += step * v;
                    }
                    b += step;
                }
            }
        }
        if pg_max - pg_min <= tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "linear classifier did not converge within {} epochs",
            config.max_epochs
        );
    }
    Ok(SvmSolution {
        weights: w,
        bias: b,
        epochs,
        converged,
    })
}
