#![allow(dead_code)]

use mmlimits_core::mm::{DistanceMatrix, FiniteMMSpace, Metric};
use proptest::prelude::*;

/// Points of `Z²` with ℓ1 distances (exact integers) and integer masses.
pub fn grid_space(points: &[(i32, i32)], counts: &[u64]) -> FiniteMMSpace {
    let rows: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as f64).collect())
        .collect();
    let labels = (0..points.len()).map(|i| format!("p{i}")).collect();
    let metric = Metric::Matrix(DistanceMatrix::from_rows(&rows).unwrap());
    FiniteMMSpace::from_counts(labels, metric, counts).unwrap()
}

/// Distinct grid points with positive integer masses.
pub fn arb_space(max_points: usize) -> impl Strategy<Value = FiniteMMSpace> {
    proptest::collection::btree_set((-4i32..5, -4i32..5), 1..=max_points).prop_flat_map(|set| {
        let points: Vec<(i32, i32)> = set.into_iter().collect();
        let k = points.len();
        proptest::collection::vec(1u64..6, k).prop_map(move |counts| grid_space(&points, &counts))
    })
}

/// Probability vectors of length `k` with denominators up to 30.
pub fn arb_weights(k: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0u64..6, k).prop_map(|mut c| {
        if c.iter().all(|&v| v == 0) {
            c[0] = 1;
        }
        let total: u64 = c.iter().sum();
        c.iter().map(|&v| v as f64 / total as f64).collect()
    })
}
