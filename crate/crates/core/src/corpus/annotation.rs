use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;

use serde::Deserialize;

use super::{CorpusError, Diagnostic, Result};
use crate::num::{mean, population_sd};
use crate::Scalar;

/// Raw slider scores of one annotation batch: worker id -> request id -> score.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotationSet<T: Scalar> {
    batch_id: String,
    worker_scores: BTreeMap<String, BTreeMap<String, T>>,
}

impl<T: Scalar> AnnotationSet<T> {
    /// Every worker must have scored exactly the same set of requests.
    pub fn new(
        batch_id: impl Into<String>,
        worker_scores: BTreeMap<String, BTreeMap<String, T>>,
    ) -> Result<Self> {
        let batch_id = batch_id.into();
        let invalid = |message: String| CorpusError::InvalidBatch {
            batch: batch_id.clone(),
            message,
        };
        let mut workers = worker_scores.iter();
        let Some((first_worker, first)) = workers.next() else {
            return Err(invalid("no workers".into()));
        };
        if first.is_empty() {
            return Err(invalid(format!("worker {first_worker} scored nothing")));
        }
        for (worker, scores) in workers {
            if !scores.keys().eq(first.keys()) {
                return Err(invalid(format!(
                    "worker {worker} scored a different request set than {first_worker}"
                )));
            }
        }
        if let Some((w, r, _)) = worker_scores
            .iter()
            .flat_map(|(w, s)| s.iter().map(move |(r, v)| (w, r, v)))
            .find(|(_, _, v)| !v.is_finite())
        {
            return Err(invalid(format!("non-finite score from {w} for {r}")));
        }
        Ok(AnnotationSet {
            batch_id,
            worker_scores,
        })
    }

    pub fn batch_id(&self) -> &str {
        &self.batch_id
    }

    pub fn workers(&self) -> impl Iterator<Item = &str> {
        self.worker_scores.keys().map(String::as_str)
    }

    pub fn requests(&self) -> impl Iterator<Item = &str> {
        self.worker_scores
            .values()
            .next()
            .into_iter()
            .flat_map(|m| m.keys().map(String::as_str))
    }

    pub fn worker_scores(&self) -> &BTreeMap<String, BTreeMap<String, T>> {
        &self.worker_scores
    }

    /// One score vector per worker, ordered by request id.
    pub fn worker_vectors(&self) -> Vec<(&str, Vec<T>)> {
        self.worker_scores
            .iter()
            .map(|(w, s)| (w.as_str(), s.values().copied().collect()))
            .collect()
    }
}

#[derive(Debug, Deserialize)]
struct AnnotationRow {
    batch_id: String,
    worker_id: String,
    request_id: String,
    raw_score: f64,
}

/// Reads delimited annotation rows `batch_id, worker_id, request_id,
/// raw_score` (header required). Tab-delimited input is detected from the
/// header line; anything else is treated as comma-separated.
pub fn read_annotations<T: Scalar, R: Read>(
    reader: R,
    source: &str,
) -> Result<Vec<AnnotationSet<T>>> {
    let mut text = String::new();
    let mut reader = reader;
    reader.read_to_string(&mut text)?;
    let header = text.lines().next().unwrap_or_default();
    let delimiter = if header.contains('\t') { b'\t' } else { b',' };
    let mut csv = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut batches: BTreeMap<String, BTreeMap<String, BTreeMap<String, T>>> = BTreeMap::new();
    for row in csv.deserialize::<AnnotationRow>() {
        let row = row.map_err(|e| CorpusError::Malformed {
            file: source.to_string(),
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let slot = batches
            .entry(row.batch_id.clone())
            .or_default()
            .entry(row.worker_id.clone())
            .or_default();
        if slot
            .insert(row.request_id.clone(), T::lit(row.raw_score))
            .is_some()
        {
            return Err(CorpusError::InvalidBatch {
                batch: row.batch_id,
                message: format!(
                    "worker {} scored request {} twice",
                    row.worker_id, row.request_id
                ),
            });
        }
    }
    batches
        .into_iter()
        .map(|(id, scores)| AnnotationSet::new(id, scores))
        .collect()
}

/// Output of [`normalize_and_aggregate`].
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregation<T: Scalar> {
    /// Request id -> mean of its normalized scores.
    pub politeness: BTreeMap<String, T>,
    /// Request id -> (worker id, normalized score), ordered by worker id.
    pub normalized: BTreeMap<String, Vec<(String, T)>>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Z-score normalizes every worker over all of their annotations (population
/// standard deviation) and averages the normalized scores per request.
///
/// Workers whose scores are all identical are dropped with a diagnostic. A
/// request left without any annotation is an error.
pub fn normalize_and_aggregate<T: Scalar>(sets: &[AnnotationSet<T>]) -> Result<Aggregation<T>> {
    // worker -> [(request, raw)]
    let mut by_worker: BTreeMap<&str, Vec<(&str, T)>> = BTreeMap::new();
    let mut all_requests: BTreeSet<&str> = BTreeSet::new();
    for set in sets {
        for (worker, scores) in &set.worker_scores {
            let entry = by_worker.entry(worker.as_str()).or_default();
            for (request, &raw) in scores {
                entry.push((request.as_str(), raw));
                all_requests.insert(request.as_str());
            }
        }
    }

    let mut diagnostics = Vec::new();
    let mut normalized: BTreeMap<String, Vec<(String, T)>> = BTreeMap::new();
    for (worker, mut scores) in by_worker {
        // fixed summation order regardless of batch order
        scores.sort_by(|a, b| a.0.cmp(b.0).then(a.1.partial_cmp(&b.1).expect("finite")));
        let raw: Vec<T> = scores.iter().map(|&(_, v)| v).collect();
        let distinct = raw.iter().any(|&v| v != raw[0]);
        let (Some(mu), Some(sd)) = (mean(&raw), population_sd(&raw)) else {
            continue;
        };
        if !distinct || sd <= T::zero() {
            diagnostics.push(Diagnostic::new(
                format!("worker {worker}"),
                format!(
                    "constant scores over {} annotations; annotations dropped",
                    raw.len()
                ),
            ));
            continue;
        }
        for (request, v) in scores {
            normalized
                .entry(request.to_string())
                .or_default()
                .push((worker.to_string(), (v - mu) / sd));
        }
    }

    let mut politeness = BTreeMap::new();
    for request in all_requests {
        let Some(scores) = normalized.get(request) else {
            return Err(CorpusError::NoAnnotations(request.to_string()));
        };
        let values: Vec<T> = scores.iter().map(|&(_, v)| v).collect();
        politeness.insert(request.to_string(), mean(&values).expect("non-empty"));
    }

    Ok(Aggregation {
        politeness,
        normalized,
        diagnostics,
    })
}
