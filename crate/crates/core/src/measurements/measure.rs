use serde::{Deserialize, Serialize};

use crate::error::{MmError, Result};
use crate::invariants::ScalarPushforward;
use crate::numeric::compensated_sum;

/// A finitely supported probability measure on `(R^dim, ℓ∞)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureOnRN {
    dim: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
    grain: Option<u64>,
}

impl MeasureOnRN {
    /// Build from weighted points, merging coincident points and dropping zero weights.
    pub fn from_weighted(dim: usize, coords: Vec<f64>, weights: Vec<f64>, grain: Option<u64>) -> Result<Self> {
        if dim == 0 || coords.len() != dim * weights.len() {
            return Err(MmError::arg("coordinates do not match weights and dimension"));
        }
        if coords.iter().any(|v| !v.is_finite()) || weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(MmError::arg("non-finite coordinate or negative weight"));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(MmError::arg(format!("measure has mass {total}")));
        }
        let n = weights.len();
        let row = |i: usize| &coords[i * dim..(i + 1) * dim];
        let mut order: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
        order.sort_by(|&a, &b| {
            for (x, y) in row(a).iter().zip(row(b)) {
                match x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal) {
                    std::cmp::Ordering::Equal => continue,
                    other => return other,
                }
            }
            a.cmp(&b)
        });
        let mut points = Vec::with_capacity(order.len() * dim);
        let mut merged: Vec<Vec<f64>> = Vec::with_capacity(order.len());
        let mut last: Option<usize> = None;
        for &i in &order {
            match last {
                Some(l) if row(l) == row(i) => merged.last_mut().expect("group open").push(weights[i]),
                _ => {
                    points.extend_from_slice(row(i));
                    merged.push(vec![weights[i]]);
                    last = Some(i);
                }
            }
        }
        let weights = match grain {
            Some(g) => merged
                .iter()
                .map(|ws| ws.iter().map(|w| (w * g as f64).round() as u64).sum::<u64>() as f64 / g as f64)
                .collect(),
            None => merged.into_iter().map(compensated_sum).collect(),
        };
        Ok(MeasureOnRN { dim, points, weights, grain })
    }

    /// Uniform measure on the given points (duplicates merged).
    pub fn uniform(dim: usize, coords: Vec<f64>) -> Result<Self> {
        let m = coords.len() / dim.max(1);
        if m == 0 {
            return Err(MmError::arg("empty point set"));
        }
        Self::from_weighted(dim, coords, vec![1.0 / m as f64; m], Some(m as u64))
    }

    pub fn dirac(point: Vec<f64>) -> Self {
        MeasureOnRN { dim: point.len(), points: point, weights: vec![1.0], grain: Some(1) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn grain(&self) -> Option<u64> {
        self.grain
    }

    /// `‖p_i − q_j‖∞` between an atom of `self` and an atom of `other`.
    #[inline]
    pub fn cross_distance(&self, i: usize, other: &MeasureOnRN, j: usize) -> f64 {
        self.point(i).iter().zip(other.point(j)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Every coordinate lies in `[−r, r]`.
    pub fn is_within(&self, r: f64) -> bool {
        self.points.iter().all(|v| v.abs() <= r)
    }

    /// `(π_R)_* μ`.
    pub fn clamped(&self, r: f64) -> Result<Self> {
        let coords = self.points.chunks(self.dim).flat_map(|p| clamp_projection(r, p)).collect();
        Self::from_weighted(self.dim, coords, self.weights.clone(), self.grain)
    }

    /// Pushforward under the `c`-th coordinate.
    pub fn marginal(&self, c: usize) -> ScalarPushforward {
        let values = (0..self.len()).map(|i| self.point(i)[c]).collect();
        ScalarPushforward::new(values, self.weights.clone(), self.grain).expect("marginal of a valid measure is valid")
    }
}

/// Nearest-point projection onto the box `[−r, r]^N`: a coordinatewise clamp.
pub fn clamp_projection(r: f64, q: &[f64]) -> Vec<f64> {
    let r = r.max(0.0);
    q.iter().map(|v| v.clamp(-r, r)).collect()
}
