//! Invariants of annotation normalization, aggregation and quartiles on
//! randomly generated batches.

use std::collections::BTreeMap;

use politeness_core::corpus::{
    assign_quartiles, normalize_and_aggregate, read_annotations, AnnotationSet,
};
use proptest::prelude::{prop, prop_assert, prop_assert_eq, proptest, ProptestConfig};

type Batch = Vec<(String, Vec<(String, f64)>)>;

/// Batches of (worker, [(request, score)]); workers are drawn from a shared
/// pool so that a worker can appear in several batches.
fn build(batches: &[Batch]) -> Vec<AnnotationSet<f64>> {
    batches
        .iter()
        .enumerate()
        .map(|(b, workers)| {
            let m: BTreeMap<String, BTreeMap<String, f64>> = workers
                .iter()
                .map(|(w, scores)| (w.clone(), scores.iter().cloned().collect()))
                .collect();
            AnnotationSet::new(format!("b{b}"), m).unwrap()
        })
        .collect()
}

fn batch_strategy(index: usize) -> impl proptest::strategy::Strategy<Value = Batch> {
    use proptest::strategy::Strategy;
    (2usize..6, 2usize..8).prop_flat_map(move |(n_workers, n_requests)| {
        prop::collection::vec(
            (0usize..8, prop::collection::vec(-3.0f64..3.0, n_requests)),
            n_workers,
        )
        .prop_map(move |rows| {
            let mut seen = std::collections::BTreeSet::new();
            rows.into_iter()
                .filter(|(w, _)| seen.insert(*w))
                .map(|(w, scores)| {
                    let scores = scores
                        .into_iter()
                        .enumerate()
                        .map(|(r, s)| (format!("b{index}-r{r}"), s))
                        .collect();
                    (format!("w{w}"), scores)
                })
                .collect()
        })
    })
}

fn batches() -> impl proptest::strategy::Strategy<Value = Vec<Batch>> {
    use proptest::strategy::Strategy;
    (batch_strategy(0), batch_strategy(1), batch_strategy(2)).prop_map(|(a, b, c)| vec![a, b, c])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normalized_workers_are_standard(raw in batches()) {
        let agg = normalize_and_aggregate(&build(&raw)).unwrap();
        let mut per_worker: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
        for scores in agg.normalized.values() {
            for (w, z) in scores {
                per_worker.entry(w).or_default().push(*z);
            }
        }
        for (w, zs) in per_worker {
            let n = zs.len() as f64;
            let mean = zs.iter().sum::<f64>() / n;
            let sd = (zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n).sqrt();
            prop_assert!(mean.abs() < 1e-9, "{w}: mean {mean}");
            prop_assert!((sd - 1.0).abs() < 1e-9, "{w}: sd {sd}");
        }
        for (r, scores) in &agg.normalized {
            let mean = scores.iter().map(|s| s.1).sum::<f64>() / scores.len() as f64;
            prop_assert!((agg.politeness[r] - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregation_ignores_batch_and_worker_order(raw in batches()) {
        let forward = normalize_and_aggregate(&build(&raw)).unwrap();
        let mut reversed = raw.clone();
        reversed.reverse();
        for b in &mut reversed {
            b.reverse();
            for (_, scores) in b.iter_mut() {
                scores.reverse();
            }
        }
        let mut sets = build(&reversed);
        sets.reverse();
        let backward = normalize_and_aggregate(&sets).unwrap();
        prop_assert_eq!(forward.politeness, backward.politeness);
    }

    #[test]
    fn quartiles_partition(scores in prop::collection::vec(-2.0f64..2.0, 4..300)) {
        let ids: Vec<String> = (0..scores.len()).map(|i| format!("r{i}")).collect();
        let items: Vec<(&str, f64)> = ids.iter().map(String::as_str).zip(scores.iter().copied()).collect();
        let q = assign_quartiles(&items).unwrap();
        let mut sizes = [0usize; 4];
        for x in &q {
            sizes[x.index()] += 1;
        }
        let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
        prop_assert!(hi - lo <= 1);
        prop_assert_eq!(sizes.iter().sum::<usize>(), scores.len());
    }
}

#[test]
fn delimited_input_round_trip() {
    let text = "batch_id,worker_id,request_id,raw_score\n\
                b1,w1,r1,1.0\nb1,w1,r2,-1.0\nb1,w2,r1,0.5\nb1,w2,r2,0.0\n";
    let sets = read_annotations::<f64, _>(text.as_bytes(), "inline").unwrap();
    let agg = normalize_and_aggregate(&sets).unwrap();
    assert_eq!(agg.politeness["r1"], 1.0);
    assert_eq!(agg.politeness["r2"], -1.0);
    let err = read_annotations::<f64, _>("batch_id,worker_id,request_id,raw_score\nb1,w1,r1,x\n".as_bytes(), "bad.csv")
        .unwrap_err();
    assert!(err.to_string().starts_with("bad.csv:2"), "{err}");
}
