use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{MmError, Result};
use crate::numeric::compensated_sum;

/// Tolerance on the metric axioms.
pub const METRIC_TOL: f64 = 1e-9;
/// Tolerance on total mass.
pub const MASS_TOL: f64 = 1e-12;

/// How distances between embedded coordinates are measured.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EmbeddedMetric {
    /// `‖x − y‖₂`.
    Euclidean,
    /// `‖x − y‖∞`.
    Chebyshev,
    /// Great-circle distance on the sphere of the given radius.
    SphereGeodesic { radius: f64 },
    /// Quotient of `C^k` by the phase action: `min_t ‖x − e^{it} y‖₂`.
    /// Coordinates are interleaved `(re, im)` pairs.
    PhaseQuotient,
    /// Fubini–Study distance `r · arccos(|⟨x, y⟩_C| / r²)` on `S^{2n+1}(r) / S¹`.
    FubiniStudy { radius: f64 },
}

/// Points in `R^dim`, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    kind: EmbeddedMetric,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>, kind: EmbeddedMetric) -> Result<Self> {
        if dim == 0 {
            return Err(MmError::arg("point cloud dimension must be positive"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(MmError::arg(format!(
                "coordinate buffer of length {} is not a multiple of dim {dim}",
                coords.len()
            )));
        }
        if matches!(kind, EmbeddedMetric::PhaseQuotient | EmbeddedMetric::FubiniStudy { .. }) && !dim.is_multiple_of(2)
        {
            return Err(MmError::arg("phase quotients need an even real dimension"));
        }
        Ok(PointCloud { dim, coords, kind })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn kind(&self) -> EmbeddedMetric {
        self.kind
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        point_distance(self.kind, self.point(i), self.point(j))
    }

    fn select(&self, indices: &[usize]) -> PointCloud {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointCloud { dim: self.dim, coords, kind: self.kind }
    }
}

/// Distance between two coordinate vectors under `kind`.
pub fn point_distance(kind: EmbeddedMetric, x: &[f64], y: &[f64]) -> f64 {
    match kind {
        EmbeddedMetric::Euclidean => x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt(),
        EmbeddedMetric::Chebyshev => x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max),
        EmbeddedMetric::SphereGeodesic { radius } => {
            let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            radius * (dot / (radius * radius)).clamp(-1.0, 1.0).acos()
        }
        EmbeddedMetric::PhaseQuotient => {
            let (nx, ny, h) = hermitian_parts(x, y);
            (nx + ny - 2.0 * h).max(0.0).sqrt()
        }
        EmbeddedMetric::FubiniStudy { radius } => {
            let (_, _, h) = hermitian_parts(x, y);
            radius * (h / (radius * radius)).clamp(-1.0, 1.0).acos()
        }
    }
}

/// `(‖x‖², ‖y‖², |⟨x, y⟩_C|)` for interleaved complex coordinates.
pub(crate) fn hermitian_parts(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let (mut nx, mut ny, mut re, mut im) = (0.0, 0.0, 0.0, 0.0);
    for (a, b) in x.chunks_exact(2).zip(y.chunks_exact(2)) {
        nx += a[0] * a[0] + a[1] * a[1];
        ny += b[0] * b[0] + b[1] * b[1];
        // ⟨x, y⟩ = Σ x_k conj(y_k)
        re += a[0] * b[0] + a[1] * b[1];
        im += a[1] * b[0] - a[0] * b[1];
    }
    (nx, ny, re.hypot(im))
}

/// Full symmetric distance matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(MmError::arg(format!("row {i} has length {}, expected {n}", row.len())));
            }
            data.extend_from_slice(row);
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn from_flat(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(MmError::arg(format!("flat matrix has {} entries, expected {}", data.len(), n * n)));
        }
        Ok(DistanceMatrix { n, data })
    }

    /// Build from a row-major lower triangle including the diagonal.
    pub fn from_lower_triangle(n: usize, tri: &[f64]) -> Result<Self> {
        if tri.len() != n * (n + 1) / 2 {
            return Err(MmError::arg(format!(
                "lower triangle has {} entries, expected {} for {n} points",
                tri.len(),
                n * (n + 1) / 2
            )));
        }
        let mut data = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in 0..=i {
                data[i * n + j] = tri[k];
                data[j * n + i] = tri[k];
                k += 1;
            }
        }
        Ok(DistanceMatrix { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn select(&self, indices: &[usize]) -> DistanceMatrix {
        let k = indices.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in indices {
            for &j in indices {
                data.push(self.get(i, j));
            }
        }
        DistanceMatrix { n: k, data }
    }
}

/// The unscaled distance structure of a space.
#[derive(Clone, Debug, PartialEq)]
pub enum Metric {
    Matrix(DistanceMatrix),
    Embedded(PointCloud),
}

impl Metric {
    pub fn len(&self) -> usize {
        match self {
            Metric::Matrix(m) => m.len(),
            Metric::Embedded(c) => c.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn base_distance(&self, i: usize, j: usize) -> f64 {
        match self {
            Metric::Matrix(m) => m.get(i, j),
            Metric::Embedded(c) => c.distance(i, j),
        }
    }

    fn select(&self, indices: &[usize]) -> Metric {
        match self {
            Metric::Matrix(m) => Metric::Matrix(m.select(indices)),
            Metric::Embedded(c) => Metric::Embedded(c.select(indices)),
        }
    }
}

/// One violated invariant.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    LengthMismatch { what: String, expected: usize, actual: usize },
    NonFinite { i: usize, j: usize },
    NonzeroDiagonal { i: usize, value: f64 },
    Negative { i: usize, j: usize, value: f64 },
    Asymmetric { i: usize, j: usize, dij: f64, dji: f64 },
    Triangle { i: usize, j: usize, k: usize, excess: f64 },
    NegativeWeight { i: usize, value: f64 },
    MassNotOne { total: f64 },
    Empty,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::LengthMismatch { what, expected, actual } => {
                write!(f, "{what}: expected length {expected}, got {actual}")
            }
            Violation::NonFinite { i, j } => write!(f, "d[{i}][{j}] is not finite"),
            Violation::NonzeroDiagonal { i, value } => write!(f, "d[{i}][{i}] = {value} ≠ 0"),
            Violation::Negative { i, j, value } => write!(f, "d[{i}][{j}] = {value} < 0"),
            Violation::Asymmetric { i, j, dij, dji } => {
                write!(f, "d[{i}][{j}] = {dij} ≠ d[{j}][{i}] = {dji}")
            }
            Violation::Triangle { i, j, k, excess } => {
                write!(f, "triangle inequality fails on ({i},{j},{k}) by {excess}")
            }
            Violation::NegativeWeight { i, value } => write!(f, "weight[{i}] = {value} < 0"),
            Violation::MassNotOne { total } => write!(f, "mass ≠ 1 (total {total})"),
            Violation::Empty => write!(f, "space has no points of positive weight"),
        }
    }
}

/// Every violated invariant of a candidate space. Empty iff valid.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_weights(weights: &[f64], report: &mut ValidationReport) {
    let mut any_positive = false;
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            report.violations.push(Violation::NegativeWeight { i, value: w });
        } else if w > 0.0 {
            any_positive = true;
        }
    }
    if !any_positive {
        report.violations.push(Violation::Empty);
        return;
    }
    let total = compensated_sum(weights.iter().copied());
    if (total - 1.0).abs() > MASS_TOL {
        report.violations.push(Violation::MassNotOne { total });
    }
}

fn check_matrix(n: usize, d: impl Fn(usize, usize) -> f64, report: &mut ValidationReport) {
    for i in 0..n {
        for j in 0..n {
            let v = d(i, j);
            if !v.is_finite() {
                report.violations.push(Violation::NonFinite { i, j });
                return;
            }
        }
    }
    for i in 0..n {
        let v = d(i, i);
        if v.abs() > METRIC_TOL {
            report.violations.push(Violation::NonzeroDiagonal { i, value: v });
        }
        for j in (i + 1)..n {
            let (a, b) = (d(i, j), d(j, i));
            if a < -METRIC_TOL || b < -METRIC_TOL {
                report.violations.push(Violation::Negative { i, j, value: a.min(b) });
            }
            if (a - b).abs() > METRIC_TOL * a.abs().max(b.abs()).max(1.0) {
                report.violations.push(Violation::Asymmetric { i, j, dij: a, dji: b });
            }
        }
    }
    for i in 0..n {
        for k in (i + 1)..n {
            let direct = d(i, k);
            let slack = METRIC_TOL * direct.abs().max(1.0);
            for j in 0..n {
                if j == i || j == k {
                    continue;
                }
                let via = d(i, j) + d(j, k);
                if direct > via + slack {
                    report.violations.push(Violation::Triangle { i, j, k, excess: direct - via });
                }
            }
        }
    }
}

/// Validate raw matrix data (full `n × n`, row-major) and weights.
pub fn validate_parts(n: usize, dist: &[f64], weights: &[f64]) -> ValidationReport {
    let mut report = ValidationReport::default();
    if dist.len() != n * n {
        report.violations.push(Violation::LengthMismatch {
            what: "distance matrix".into(),
            expected: n * n,
            actual: dist.len(),
        });
        return report;
    }
    if weights.len() != n {
        report.violations.push(Violation::LengthMismatch {
            what: "weights".into(),
            expected: n,
            actual: weights.len(),
        });
        return report;
    }
    check_matrix(n, |i, j| dist[i * n + j], &mut report);
    check_weights(weights, &mut report);
    report
}

/// A finite mm-space: labelled points, a metric and a probability measure with full support.
///
/// Distances are `scale · base`, where `base` comes from the stored [`Metric`]. Keeping the
/// scale separate makes `scale_space(s, scale_space(t, X)) == scale_space(s·t, X)` hold exactly.
#[derive(Clone, Debug)]
pub struct FiniteMMSpace {
    labels: Vec<String>,
    metric: Metric,
    scale: f64,
    weights: Vec<f64>,
    grain: Option<u64>,
}

impl FiniteMMSpace {
    /// Build a space, stripping zero-weight points and validating all invariants.
    pub fn new(labels: Vec<String>, metric: Metric, weights: Vec<f64>) -> Result<Self> {
        Self::build(labels, metric, weights, None)
    }

    pub(crate) fn build(labels: Vec<String>, metric: Metric, weights: Vec<f64>, grain: Option<u64>) -> Result<Self> {
        let n = metric.len();
        let mut report = ValidationReport::default();
        if labels.len() != n {
            report.violations.push(Violation::LengthMismatch {
                what: "labels".into(),
                expected: n,
                actual: labels.len(),
            });
        }
        if weights.len() != n {
            report.violations.push(Violation::LengthMismatch {
                what: "weights".into(),
                expected: n,
                actual: weights.len(),
            });
        }
        if !report.is_valid() {
            return Err(MmError::InvalidSpace(report));
        }
        check_weights(&weights, &mut report);
        if !report.is_valid() {
            return Err(MmError::InvalidSpace(report));
        }
        let keep: Vec<usize> = (0..n).filter(|&i| weights[i] > 0.0).collect();
        let (labels, metric, weights) = if keep.len() == n {
            (labels, metric, weights)
        } else {
            (
                keep.iter().map(|&i| labels[i].clone()).collect(),
                metric.select(&keep),
                keep.iter().map(|&i| weights[i]).collect(),
            )
        };
        let grain = grain.or_else(|| uniform_grain(&weights));
        let space = FiniteMMSpace { labels, metric, scale: 1.0, weights, grain };
        let report = space.validate();
        if !report.is_valid() {
            return Err(MmError::InvalidSpace(report));
        }
        Ok(space)
    }

    /// Convenience constructor from a full distance matrix; labels are `p0, p1, ...`.
    pub fn from_matrix(rows: &[Vec<f64>], weights: Vec<f64>) -> Result<Self> {
        let matrix = DistanceMatrix::from_rows(rows)?;
        let labels = default_labels(matrix.len());
        Self::new(labels, Metric::Matrix(matrix), weights)
    }

    /// Space on a point cloud with uniform weights.
    pub fn uniform_cloud(cloud: PointCloud) -> Result<Self> {
        let m = cloud.len();
        if m == 0 {
            return Err(MmError::InvalidSpace(ValidationReport { violations: vec![Violation::Empty] }));
        }
        let weights = vec![1.0 / m as f64; m];
        Self::build(default_labels(m), Metric::Embedded(cloud), weights, Some(m as u64))
    }

    /// Weights `counts[i] / Σ counts`, kept exact for mass comparisons.
    pub fn from_counts(labels: Vec<String>, metric: Metric, counts: &[u64]) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(MmError::InvalidSpace(ValidationReport { violations: vec![Violation::Empty] }));
        }
        let weights = counts.iter().map(|&c| c as f64 / total as f64).collect();
        Self::build(labels, metric, weights, Some(total))
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    #[inline]
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.scale * self.metric.base_distance(i, j)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn metric(&self) -> &Metric {
        &self.metric
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Weights are all multiples of `1 / grain` when this is `Some`.
    pub fn grain(&self) -> Option<u64> {
        self.grain
    }

    /// Embedded coordinates and the scale to apply to them.
    pub fn embedding(&self) -> Option<(&PointCloud, f64)> {
        match &self.metric {
            Metric::Embedded(c) => Some((c, self.scale)),
            Metric::Matrix(_) => None,
        }
    }

    /// Report every violated invariant. Triangle checks run only for matrix-backed spaces;
    /// embedded metrics are metrics by construction.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        if self.weights.is_empty() {
            report.violations.push(Violation::Empty);
            return report;
        }
        match &self.metric {
            Metric::Matrix(_) => check_matrix(self.len(), |i, j| self.dist(i, j), &mut report),
            Metric::Embedded(c) => {
                if c.coords().iter().any(|v| !v.is_finite()) {
                    report.violations.push(Violation::NonFinite { i: 0, j: 0 });
                }
            }
        }
        check_weights(&self.weights, &mut report);
        if self.weights.iter().any(|&w| w <= 0.0) {
            for (i, &w) in self.weights.iter().enumerate() {
                if w == 0.0 {
                    report.violations.push(Violation::NegativeWeight { i, value: w });
                }
            }
        }
        report
    }

    /// `tX := (X, t d_X, μ_X)`.
    pub fn scaled(&self, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(MmError::arg(format!("scale factor must be positive, got {t}")));
        }
        let mut out = self.clone();
        out.scale *= t;
        Ok(out)
    }

    /// Same points and metric, new weights (zeros stripped).
    pub fn reweighted(&self, weights: Vec<f64>) -> Result<Self> {
        let mut out = Self::build(self.labels.clone(), self.metric.clone(), weights, None)?;
        out.scale = self.scale;
        Ok(out)
    }

    /// Pairwise distance matrix (scaled). Quadratic memory.
    pub fn distance_rows(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| (0..self.len()).map(|j| self.dist(i, j)).collect()).collect()
    }

    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                d = d.max(self.dist(i, j));
            }
        }
        d
    }

    pub fn to_file(&self) -> SpaceFile {
        match &self.metric {
            Metric::Matrix(_) => {
                let n = self.len();
                let mut tri = Vec::with_capacity(n * (n + 1) / 2);
                for i in 0..n {
                    for j in 0..=i {
                        tri.push(self.dist(i, j));
                    }
                }
                SpaceFile {
                    labels: self.labels.clone(),
                    dist: Some(tri),
                    weights: self.weights.clone(),
                    coords: None,
                    metric: None,
                    scale: None,
                }
            }
            Metric::Embedded(c) => SpaceFile {
                labels: self.labels.clone(),
                dist: None,
                weights: self.weights.clone(),
                coords: Some((0..c.len()).map(|i| c.point(i).to_vec()).collect()),
                metric: Some(c.kind()),
                scale: (self.scale != 1.0).then_some(self.scale),
            },
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.to_file())?)
    }

    /// Load and validate. Invalid spaces are rejected with the full report.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpaceFile = serde_json::from_str(text)?;
        file.into_space()
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("p{i}")).collect()
}

fn uniform_grain(weights: &[f64]) -> Option<u64> {
    let m = weights.len();
    let w = 1.0 / m as f64;
    weights.iter().all(|&x| (x - w).abs() <= 1e-15 * w.max(1e-300)).then_some(m as u64)
}

/// On-disk form: `{labels, dist, weights}` with `dist` the row-major lower triangle
/// (diagonal included); embedded spaces carry `coords` and `metric` instead of `dist`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpaceFile {
    pub labels: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dist: Option<Vec<f64>>,
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<EmbeddedMetric>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
}

impl SpaceFile {
    /// Report without constructing; used by the `validate` command.
    pub fn validate(&self) -> ValidationReport {
        let n = self.labels.len();
        match (&self.dist, &self.coords) {
            (Some(tri), _) => match DistanceMatrix::from_lower_triangle(n, tri) {
                Ok(m) => validate_parts(n, &m.data, &self.weights),
                Err(_) => ValidationReport {
                    violations: vec![Violation::LengthMismatch {
                        what: "dist (lower triangle)".into(),
                        expected: n * (n + 1) / 2,
                        actual: tri.len(),
                    }],
                },
            },
            (None, Some(coords)) => {
                let mut report = ValidationReport::default();
                if coords.len() != n {
                    report.violations.push(Violation::LengthMismatch {
                        what: "coords".into(),
                        expected: n,
                        actual: coords.len(),
                    });
                }
                if self.weights.len() != n {
                    report.violations.push(Violation::LengthMismatch {
                        what: "weights".into(),
                        expected: n,
                        actual: self.weights.len(),
                    });
                }
                if report.is_valid() {
                    check_weights(&self.weights, &mut report);
                }
                report
            }
            (None, None) => ValidationReport {
                violations: vec![Violation::LengthMismatch {
                    what: "dist".into(),
                    expected: n * (n + 1) / 2,
                    actual: 0,
                }],
            },
        }
    }

    pub fn into_space(self) -> Result<FiniteMMSpace> {
        let report = self.validate();
        if !report.is_valid() {
            return Err(MmError::InvalidSpace(report));
        }
        let n = self.labels.len();
        let metric = match (self.dist, self.coords) {
            (Some(tri), _) => Metric::Matrix(DistanceMatrix::from_lower_triangle(n, &tri)?),
            (None, Some(coords)) => {
                let dim = coords.first().map_or(1, |c| c.len());
                if coords.iter().any(|c| c.len() != dim) {
                    return Err(MmError::arg("coordinate rows have unequal lengths"));
                }
                let flat = coords.into_iter().flatten().collect();
                Metric::Embedded(PointCloud::new(dim, flat, self.metric.unwrap_or(EmbeddedMetric::Euclidean))?)
            }
            (None, None) => unreachable!("rejected by validate"),
        };
        let space = FiniteMMSpace::new(self.labels, metric, self.weights)?;
        match self.scale {
            Some(s) => space.scaled(s),
            None => Ok(space),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point(d: f64, w: (f64, f64)) -> Result<FiniteMMSpace> {
        FiniteMMSpace::from_matrix(&[vec![0.0, d], vec![d, 0.0]], vec![w.0, w.1])
    }

    #[test]
    fn one_point_space_is_valid() {
        let x = FiniteMMSpace::from_matrix(&[vec![0.0]], vec![1.0]).unwrap();
        assert!(x.validate().is_valid());
    }

    #[test]
    fn two_point_space_is_valid() {
        let x = two_point(1.0, (0.5, 0.5)).unwrap();
        assert!(x.validate().is_valid());
        assert_eq!(x.dist(0, 1), 1.0);
    }

    #[test]
    fn excess_mass_is_reported() {
        let report = validate_parts(2, &[0.0, 1.0, 1.0, 0.0], &[0.6, 0.6]);
        assert!(matches!(report.violations.as_slice(), [Violation::MassNotOne { .. }]));
        assert!(report.to_string().contains("mass ≠ 1"));
        assert!(two_point(1.0, (0.6, 0.6)).is_err());
    }

    #[test]
    fn triangle_failure_names_indices() {
        let d = [0.0, 1.0, 5.0, 1.0, 0.0, 1.0, 5.0, 1.0, 0.0];
        let report = validate_parts(3, &d, &[0.2, 0.3, 0.5]);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Triangle { i: 0, j: 1, k: 2, .. })));
    }

    #[test]
    fn asymmetry_and_diagonal_are_reported() {
        let d = [0.1, 1.0, 2.0, 0.0];
        let report = validate_parts(2, &d, &[0.5, 0.5]);
        assert!(report.violations.iter().any(|v| matches!(v, Violation::NonzeroDiagonal { i: 0, .. })));
        assert!(report.violations.iter().any(|v| matches!(v, Violation::Asymmetric { .. })));
    }

    #[test]
    fn zero_weights_are_stripped() {
        let rows = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let x = FiniteMMSpace::from_matrix(&rows, vec![0.5, 0.0, 0.5]).unwrap();
        assert_eq!(x.len(), 2);
        assert_eq!(x.dist(0, 1), 2.0);
        assert_eq!(x.labels(), &["p0".to_string(), "p2".to_string()]);
    }

    #[test]
    fn scaling() {
        let x = two_point(1.0, (0.5, 0.5)).unwrap();
        assert_eq!(x.scaled(1.0).unwrap().dist(0, 1), 1.0);
        assert_eq!(x.scaled(2.0).unwrap().dist(0, 1), 2.0);
        assert!(x.scaled(0.0).is_err());
        assert!(x.scaled(-1.0).is_err());
        let a = x.scaled(0.3).unwrap().scaled(7.1).unwrap();
        let b = x.scaled(0.3 * 7.1).unwrap();
        assert_eq!(a.dist(0, 1).to_bits(), b.dist(0, 1).to_bits());
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        let rows = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.5], vec![2.0, 1.5, 0.0]];
        let x = FiniteMMSpace::from_matrix(&rows, vec![0.25, 0.25, 0.5]).unwrap();
        let text = x.to_json().unwrap();
        assert!(text.contains("\"dist\":[0.0,1.0,0.0,2.0,1.5,0.0]"));
        let y = FiniteMMSpace::from_json(&text).unwrap();
        assert_eq!(y.distance_rows(), x.distance_rows());
        let bad = r#"{"labels":["a","b"],"dist":[0,1,0],"weights":[0.6,0.6]}"#;
        match FiniteMMSpace::from_json(bad) {
            Err(MmError::InvalidSpace(r)) => assert!(!r.is_valid()),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn phase_quotient_distance_vanishes_on_orbits() {
        let x = [1.0, 2.0, -0.5, 0.25];
        let t = 0.7f64;
        let (c, s) = (t.cos(), t.sin());
        let y: Vec<f64> = x.chunks(2).flat_map(|z| [c * z[0] - s * z[1], s * z[0] + c * z[1]]).collect();
        assert!(point_distance(EmbeddedMetric::PhaseQuotient, &x, &y) < 1e-7);
    }
}
