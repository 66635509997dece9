use rayon::prelude::*;
use serde::Serialize;

use super::space::{DistanceMatrix, FiniteMMSpace, Metric};
use crate::error::{MmError, Result};
use crate::measurements::MeasureOnRN;
use crate::numeric::compensated_sum;

/// A map out of a finite space: into another finite space (by index) or into `R^dim`.
#[derive(Clone, Debug, PartialEq)]
pub enum PointMap {
    Indexed { target_len: usize, assignment: Vec<Option<usize>> },
    Coordinates { dim: usize, coords: Vec<f64> },
}

impl PointMap {
    pub fn total(target_len: usize, assignment: Vec<usize>) -> Self {
        PointMap::Indexed { target_len, assignment: assignment.into_iter().map(Some).collect() }
    }

    pub fn identity(n: usize) -> Self {
        Self::total(n, (0..n).collect())
    }

    pub fn constant(n: usize, target: usize, target_len: usize) -> Self {
        Self::total(target_len, vec![target; n])
    }

    /// The index assignment, failing on the first unmapped source point.
    pub fn assignment(&self, source_len: usize) -> Result<Vec<usize>> {
        match self {
            PointMap::Indexed { target_len, assignment } => {
                if assignment.len() < source_len {
                    return Err(MmError::PartialMap { index: assignment.len() });
                }
                let mut out = Vec::with_capacity(source_len);
                for (index, a) in assignment.iter().take(source_len).enumerate() {
                    match a {
                        Some(t) if t < target_len => out.push(*t),
                        _ => return Err(MmError::PartialMap { index }),
                    }
                }
                Ok(out)
            }
            PointMap::Coordinates { .. } => Err(MmError::arg("coordinate map has no index assignment")),
        }
    }

    fn check_coordinates(&self, source_len: usize) -> Result<(usize, &[f64])> {
        match self {
            PointMap::Coordinates { dim, coords } => {
                let have = coords.len() / dim;
                if have < source_len {
                    return Err(MmError::PartialMap { index: have });
                }
                let coords = &coords[..source_len * dim];
                if let Some(pos) = coords.iter().position(|v| !v.is_finite()) {
                    return Err(MmError::PartialMap { index: pos / dim });
                }
                Ok((*dim, coords))
            }
            PointMap::Indexed { .. } => Err(MmError::arg("index map has no coordinates")),
        }
    }
}

/// Image weights on the target index set. Uniform sources are counted exactly.
pub fn pushforward_weights(assignment: &[usize], target_len: usize, x: &FiniteMMSpace) -> Vec<f64> {
    match x.grain() {
        Some(g) => {
            let per: Vec<u64> = x.weights().iter().map(|w| (w * g as f64).round() as u64).collect();
            let mut counts = vec![0u64; target_len];
            for (i, &t) in assignment.iter().enumerate() {
                counts[t] += per[i];
            }
            counts.into_iter().map(|c| c as f64 / g as f64).collect()
        }
        None => {
            let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); target_len];
            for (i, &t) in assignment.iter().enumerate() {
                buckets[t].push(x.weights()[i]);
            }
            buckets.into_iter().map(compensated_sum).collect()
        }
    }
}

/// `f_*μ_X` as a measure on the points of `y` (zero-weight points dropped).
pub fn pushforward(f: &PointMap, x: &FiniteMMSpace, y: &FiniteMMSpace) -> Result<FiniteMMSpace> {
    let assignment = f.assignment(x.len())?;
    if let PointMap::Indexed { target_len, .. } = f {
        if *target_len != y.len() {
            return Err(MmError::GroundMismatch);
        }
    }
    let weights = pushforward_weights(&assignment, y.len(), x);
    debug_assert!((compensated_sum(weights.iter().copied()) - 1.0).abs() <= 1e-12);
    let mut out = FiniteMMSpace::build(y.labels().to_vec(), y.metric().clone(), weights, None)?;
    out = out.scaled(y.scale())?;
    Ok(out)
}

/// `f_*μ_X` for a map into `(R^dim, ℓ∞)`; equal images are merged.
pub fn pushforward_rn(f: &PointMap, x: &FiniteMMSpace) -> Result<MeasureOnRN> {
    let (dim, coords) = f.check_coordinates(x.len())?;
    MeasureOnRN::from_weighted(dim, coords.to_vec(), x.weights().to_vec(), x.grain())
}

/// Outcome of checking that a supplied map witnesses `Y ≺ X`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderCertificate {
    pub is_1lipschitz: bool,
    pub is_measure_preserving: bool,
    /// Pair with the largest `d_Y(f x, f x') − d_X(x, x')`, and that excess.
    pub worst_pair: Option<(usize, usize, f64)>,
}

impl OrderCertificate {
    pub fn certifies(&self) -> bool {
        self.is_1lipschitz && self.is_measure_preserving
    }
}

/// Largest Lipschitz excess `dy(i, j) − dx(i, j)` over all pairs.
pub(crate) fn worst_excess(
    n: usize,
    dx: impl Fn(usize, usize) -> f64 + Sync,
    dy: impl Fn(usize, usize) -> f64 + Sync,
) -> Option<(usize, usize, f64)> {
    (0..n)
        .into_par_iter()
        .filter_map(|i| {
            let mut best: Option<(usize, usize, f64)> = None;
            for j in (i + 1)..n {
                let e = dy(i, j) - dx(i, j);
                if best.is_none_or(|b| e > b.2) {
                    best = Some((i, j, e));
                }
            }
            best
        })
        .reduce_with(|a, b| if b.2 > a.2 || (b.2 == a.2 && (b.0, b.1) < (a.0, a.1)) { b } else { a })
}

/// Check `f : X → Y` for 1-Lipschitz continuity and `f_*μ_X = μ_Y`.
pub fn certify_lipschitz_order(f: &PointMap, x: &FiniteMMSpace, y: &FiniteMMSpace, tol: f64) -> OrderCertificate {
    let assignment = match f.assignment(x.len()) {
        Ok(a) if a.iter().all(|&t| t < y.len()) => a,
        _ => return OrderCertificate { is_1lipschitz: false, is_measure_preserving: false, worst_pair: None },
    };
    let worst = worst_excess(x.len(), |i, j| x.dist(i, j), |i, j| y.dist(assignment[i], assignment[j]));
    let is_1lipschitz = worst.is_none_or(|w| w.2 <= tol);
    let pushed = pushforward_weights(&assignment, y.len(), x);
    let is_measure_preserving = pushed.iter().zip(y.weights()).all(|(a, b)| (a - b).abs() <= tol.max(1e-12));
    OrderCertificate { is_1lipschitz, is_measure_preserving, worst_pair: worst }
}

/// Check a scalar function on `X` for 1-Lipschitz continuity.
pub fn certify_lipschitz_function(values: &[f64], x: &FiniteMMSpace, tol: f64) -> OrderCertificate {
    let worst = worst_excess(x.len(), |i, j| x.dist(i, j), |i, j| (values[i] - values[j]).abs());
    OrderCertificate {
        is_1lipschitz: values.len() == x.len() && worst.is_none_or(|w| w.2 <= tol),
        is_measure_preserving: true,
        worst_pair: worst,
    }
}

/// `X/G`: distance between orbits is the minimum over representatives, weights are orbit masses.
/// Fails with [`MmError::PseudoMetricViolation`] when the orbits do not come from an isometric
/// action and the induced function breaks the triangle inequality.
pub fn quotient_space(x: &FiniteMMSpace, orbits: &[Vec<usize>]) -> Result<FiniteMMSpace> {
    let n = x.len();
    let mut seen = vec![false; n];
    for orbit in orbits {
        if orbit.is_empty() {
            return Err(MmError::arg("empty orbit"));
        }
        for &i in orbit {
            if i >= n || seen[i] {
                return Err(MmError::arg(format!("orbits do not partition the index set (index {i})")));
            }
            seen[i] = true;
        }
    }
    if let Some(index) = seen.iter().position(|s| !s) {
        return Err(MmError::PartialMap { index });
    }
    let k = orbits.len();
    let mut data = vec![0.0; k * k];
    for a in 0..k {
        for b in (a + 1)..k {
            let mut d = f64::INFINITY;
            for &i in &orbits[a] {
                for &j in &orbits[b] {
                    d = d.min(x.dist(i, j));
                }
            }
            data[a * k + b] = d;
            data[b * k + a] = d;
        }
    }
    for a in 0..k {
        for c in (a + 1)..k {
            let direct = data[a * k + c];
            for b in 0..k {
                if b == a || b == c {
                    continue;
                }
                let via = data[a * k + b] + data[b * k + c];
                if direct > via + super::space::METRIC_TOL * direct.max(1.0) {
                    return Err(MmError::PseudoMetricViolation { i: a, j: b, k: c, direct, via });
                }
            }
        }
    }
    let weights: Vec<f64> = match x.grain() {
        Some(g) => orbits
            .iter()
            .map(|o| o.iter().map(|&i| (x.weights()[i] * g as f64).round() as u64).sum::<u64>() as f64 / g as f64)
            .collect(),
        None => orbits.iter().map(|o| compensated_sum(o.iter().map(|&i| x.weights()[i]))).collect(),
    };
    let labels =
        orbits.iter().map(|o| o.iter().map(|&i| x.labels()[i].as_str()).collect::<Vec<_>>().join("|")).collect();
    let metric = Metric::Matrix(DistanceMatrix::from_flat(k, data)?);
    FiniteMMSpace::build(labels, metric, weights, x.grain())
}

/// A transport plan between two weight vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Coupling {
    pub rows: usize,
    pub cols: usize,
    /// Row-major `rows × cols` masses.
    pub mass: Vec<f64>,
}

impl Coupling {
    pub fn new(rows: usize, cols: usize, mass: Vec<f64>) -> Result<Self> {
        if mass.len() != rows * cols {
            return Err(MmError::arg("coupling has the wrong number of entries"));
        }
        Ok(Coupling { rows, cols, mass })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mass[i * self.cols + j]
    }

    /// Row sums equal `mu` and column sums equal `nu` within `tol`.
    pub fn is_coupling_of(&self, mu: &[f64], nu: &[f64], tol: f64) -> bool {
        if mu.len() != self.rows || nu.len() != self.cols || self.mass.iter().any(|&m| m < -tol) {
            return false;
        }
        let rows_ok =
            (0..self.rows).all(|i| (compensated_sum((0..self.cols).map(|j| self.get(i, j))) - mu[i]).abs() <= tol);
        let cols_ok =
            (0..self.cols).all(|j| (compensated_sum((0..self.rows).map(|i| self.get(i, j))) - nu[j]).abs() <= tol);
        rows_ok && cols_ok
    }

    /// Nonzero entries as `(i, j, mass)` triplets.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.rows {
            for j in 0..self.cols {
                let m = self.get(i, j);
                if m > 0.0 {
                    out.push((i, j, m));
                }
            }
        }
        out
    }
}
