use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{CorpusError, Diagnostic, Quartile, Result};
use super::AnnotationSet;
use crate::num::{mean, population_sd};
use crate::stats::pearson_r;
use crate::Scalar;

/// Annotations collected per request.
pub const ANNOTATORS_PER_REQUEST: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgreementMode {
    Observed,
    /// Also computes a baseline where every worker vector is redrawn from
    /// the batch's pooled score distribution, `resamples` times.
    Randomized { resamples: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Agreement<T: Scalar> {
    pub batch_id: String,
    #[serde(bound = "")]
    pub mean_pairwise_correlation: T,
    pub pairs_used: usize,
    /// One mean pairwise correlation per resample (randomized mode only).
    #[serde(bound = "")]
    pub baseline: Vec<T>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Mean Pearson correlation over the defined worker pairs; `None` when no
/// pair is defined. Excluded pairs are reported through `on_excluded`.
fn mean_pair_correlation<T: Scalar>(
    vectors: &[(&str, Vec<T>)],
    mut on_excluded: impl FnMut(&str, &str),
) -> Option<(T, usize)> {
    let mut rs = Vec::new();
    for (i, (wa, a)) in vectors.iter().enumerate() {
        for (wb, b) in &vectors[i + 1..] {
            match pearson_r(a, b) {
                Some(r) => rs.push(r),
                None => on_excluded(wa, wb),
            }
        }
    }
    mean(&rs).map(|m| (m, rs.len()))
}

/// Inter-annotator agreement of one batch: the mean of all pairwise Pearson
/// correlations between worker score vectors.
pub fn pairwise_agreement<T: Scalar>(
    batch: &AnnotationSet<T>,
    mode: AgreementMode,
) -> Result<Agreement<T>> {
    let vectors = batch.worker_vectors();
    let n_requests = vectors.first().map_or(0, |(_, v)| v.len());
    if vectors.len() < 2 {
        return Err(CorpusError::TooFew {
            needed: 2,
            got: vectors.len(),
        });
    }
    if n_requests < 2 {
        return Err(CorpusError::TooFew {
            needed: 2,
            got: n_requests,
        });
    }

    let mut diagnostics = Vec::new();
    let (observed, pairs_used) = mean_pair_correlation(&vectors, |a, b| {
        diagnostics.push(Diagnostic::new(
            format!("batch {} workers {a}/{b}", batch.batch_id()),
            "zero variance; pair excluded",
        ))
    })
    .ok_or(CorpusError::NoValidPairs)?;

    let mut baseline = Vec::new();
    if let AgreementMode::Randomized { resamples, seed } = mode {
        // pool of within-batch standardized scores
        let pool: Vec<T> = vectors
            .iter()
            .filter_map(|(_, v)| {
                let (m, sd) = (mean(v)?, population_sd(v)?);
                (sd > T::zero()).then(|| v.iter().map(|&x| (x - m) / sd).collect::<Vec<_>>())
            })
            .flatten()
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut skipped = 0usize;
        for _ in 0..resamples {
            let drawn: Vec<(&str, Vec<T>)> = vectors
                .iter()
                .map(|(w, _)| {
                    let v = (0..n_requests)
                        .map(|_| pool[rng.gen_range(0..pool.len())])
                        .collect();
                    (*w, v)
                })
                .collect();
            match mean_pair_correlation(&drawn, |_, _| {}) {
                Some((r, _)) => baseline.push(r),
                None => skipped += 1,
            }
        }
        if skipped > 0 {
            diagnostics.push(Diagnostic::new(
                format!("batch {}", batch.batch_id()),
                format!("{skipped} resamples had no defined pair and were skipped"),
            ));
        }
    }

    Ok(Agreement {
        batch_id: batch.batch_id().to_string(),
        mean_pairwise_correlation: observed,
        pairs_used,
        baseline,
        diagnostics,
    })
}

/// Per-quartile share of requests on which every annotator gives the same
/// binary judgment (sign of the normalized score). A score of exactly zero
/// agrees with neither sign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuartileAgreement<T: Scalar> {
    pub agreeing: [usize; 4],
    pub total: [usize; 4],
    /// Percentage in [0, 100]; `None` for an empty quartile.
    #[serde(bound = "")]
    pub percent: [Option<T>; 4],
    pub diagnostics: Vec<Diagnostic>,
}

pub fn binary_agreement_by_quartile<T: Scalar>(
    normalized: &BTreeMap<String, Vec<(String, T)>>,
    quartiles: &BTreeMap<String, Quartile>,
    annotators: usize,
) -> QuartileAgreement<T> {
    let mut agreeing = [0usize; 4];
    let mut total = [0usize; 4];
    let mut diagnostics = Vec::new();
    for (request, scores) in normalized {
        if scores.len() != annotators {
            diagnostics.push(Diagnostic::new(
                format!("request {request}"),
                format!("{} annotations instead of {annotators}; excluded", scores.len()),
            ));
            continue;
        }
        let Some(q) = quartiles.get(request) else {
            diagnostics.push(Diagnostic::new(
                format!("request {request}"),
                "no quartile assigned; excluded",
            ));
            continue;
        };
        let unanimous = scores.iter().all(|(_, v)| *v > T::zero())
            || scores.iter().all(|(_, v)| *v < T::zero());
        total[q.index()] += 1;
        agreeing[q.index()] += usize::from(unanimous);
    }
    let percent = std::array::from_fn(|i| {
        (total[i] > 0).then(|| {
            T::lit(100.0) * T::from_usize_lossy(agreeing[i]) / T::from_usize_lossy(total[i])
        })
    });
    QuartileAgreement {
        agreeing,
        total,
        percent,
        diagnostics,
    }
}

/// Replaces every normalized annotation with a draw from the pooled
/// normalized scores; the reference point for [`binary_agreement_by_quartile`].
pub fn randomize_normalized<T: Scalar>(
    normalized: &BTreeMap<String, Vec<(String, T)>>,
    seed: u64,
) -> BTreeMap<String, Vec<(String, T)>> {
    let pool: Vec<T> = normalized
        .values()
        .flat_map(|v| v.iter().map(|(_, x)| *x))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    normalized
        .iter()
        .map(|(r, v)| {
            let drawn = v
                .iter()
                .map(|(w, _)| (w.clone(), pool[rng.gen_range(0..pool.len())]))
                .collect();
            (r.clone(), drawn)
        })
        .collect()
}
