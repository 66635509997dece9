use serde::Serialize;

use crate::error::{MmError, Result};
use crate::invariants::ScalarPushforward;
use crate::special::normal_cdf;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rearrangement {
    pub grid: Vec<f64>,
    /// `α(x)`: the least atom `x′` with `σ̂(−∞, x′] ≥ Φ(x)`.
    pub alpha: Vec<f64>,
    /// `max (Δα − Δx)/Δx` over adjacent grid points, floored at 0.
    pub lipschitz_violation: f64,
    pub monotone: bool,
}

/// Evenly spaced grid from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=k).map(|i| lo + i as f64 * step).collect()
}

/// Monotone map pushing `γ¹` to the given law, by quantile matching on a grid.
pub fn normal_law_rearrangement(p: &ScalarPushforward, grid: &[f64]) -> Result<Rearrangement> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(MmError::arg("rearrangement grid must be strictly increasing with at least two points"));
    }
    let values = p.values();
    let mut cdf = Vec::with_capacity(values.len());
    match p.counts() {
        Some((c, g)) => {
            let mut acc = 0u64;
            for &k in c {
                acc += k;
                cdf.push(acc as f64 / g as f64);
            }
        }
        None => {
            let mut acc = 0.0;
            for &w in p.weights() {
                acc += w;
                cdf.push(acc);
            }
        }
    }
    let alpha: Vec<f64> = grid
        .iter()
        .map(|&x| {
            let target = normal_cdf(x);
            let i = cdf.partition_point(|&c| c < target);
            values[i.min(values.len() - 1)]
        })
        .collect();
    let monotone = alpha.windows(2).all(|w| w[1] >= w[0]);
    let lipschitz_violation = grid
        .windows(2)
        .zip(alpha.windows(2))
        .map(|(x, a)| ((a[1] - a[0]) - (x[1] - x[0])) / (x[1] - x[0]))
        .fold(0.0, f64::max);
    Ok(Rearrangement { grid: grid.to_vec(), alpha, lipschitz_violation, monotone })
}
