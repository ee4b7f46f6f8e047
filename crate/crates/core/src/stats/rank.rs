use std::cmp::Ordering;

use crate::Scalar;

/// Twice the midrank of every value (so tied ranks stay integral), aligned
/// with the input, plus the sizes of all tie groups.
pub(crate) fn doubled_midranks<T: Scalar>(values: &[T]) -> (Vec<u64>, Vec<usize>) {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0u64; n];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && values[order[j]] == values[order[i]] {
            j += 1;
        }
        // positions i+1..=j share the rank (i+1+j)/2
        let doubled = (i + 1 + j) as u64;
        for &idx in &order[i..j] {
            ranks[idx] = doubled;
        }
        ties.push(j - i);
        i = j;
    }
    (ranks, ties)
}

/// Midranks (average rank for ties), 1-based.
pub fn midranks<T: Scalar>(values: &[T]) -> Vec<T> {
    doubled_midranks(values)
        .0
        .into_iter()
        .map(|r| T::lit(r as f64 / 2.0))
        .collect()
}

/// Tie correction term: sum of t^3 - t over tie groups.
pub(crate) fn tie_term(ties: &[usize]) -> f64 {
    ties.iter()
        .map(|&t| {
            let t = t as f64;
            t * t * t - t
        })
        .sum()
}
