use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::pushforward::{partial_diameter, ScalarPushforward};
use crate::error::{MmError, Result};
use crate::mm::{hermitian_parts, EmbeddedMetric, FiniteMMSpace, OrderCertificate};
use crate::rng::{self, tag};

/// A scalar function on a finite mm-space that is 1-Lipschitz either by construction
/// or, for [`Observable::Values`], by numeric certification.
#[derive(Clone, Debug, PartialEq)]
pub enum Observable {
    DistanceToPoint(usize),
    DistanceToSet(Vec<usize>),
    /// The `k`-th embedded coordinate.
    Coordinate(usize),
    /// `⟨u, x⟩` on embedded coordinates.
    Linear(Vec<f64>),
    /// `|⟨u, z⟩_C|` on interleaved complex coordinates; invariant under the phase action.
    HopfModulus(Vec<f64>),
    /// Explicit values, e.g. pulled back through a map or produced by a solver.
    Values(Arc<[f64]>),
    Shifted(Box<Observable>, f64),
    Max(Vec<Observable>),
    Min(Vec<Observable>),
}

/// Where a family member came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    DistanceToPoint,
    DistanceToSet,
    LinearProjection,
    RandomDirection,
    HopfProjection,
    SolverInduced,
    Lattice,
}

fn norm2(u: &[f64]) -> f64 {
    u.iter().map(|a| a * a).sum::<f64>().sqrt()
}

const NORM_SLACK: f64 = 1e-12;

impl Observable {
    /// Values on every point of `x`. Embedded observables are multiplied by the space's scale.
    pub fn evaluate(&self, x: &FiniteMMSpace) -> Result<Vec<f64>> {
        let n = x.len();
        match self {
            Observable::DistanceToPoint(c) => {
                if *c >= n {
                    return Err(MmError::arg(format!("point {c} out of range")));
                }
                Ok((0..n).map(|i| x.dist(i, *c)).collect())
            }
            Observable::DistanceToSet(set) => {
                if set.is_empty() || set.iter().any(|&c| c >= n) {
                    return Err(MmError::arg("distance to an empty or out-of-range set"));
                }
                Ok((0..n).map(|i| set.iter().map(|&c| x.dist(i, c)).fold(f64::INFINITY, f64::min)).collect())
            }
            Observable::Coordinate(k) => {
                let (cloud, s) = x.embedding().ok_or(MmError::MissingEmbedding)?;
                if *k >= cloud.dim() {
                    return Err(MmError::arg(format!("coordinate {k} out of range")));
                }
                Ok((0..n).map(|i| s * cloud.point(i)[*k]).collect())
            }
            Observable::Linear(u) => {
                let (cloud, s) = x.embedding().ok_or(MmError::MissingEmbedding)?;
                if u.len() != cloud.dim() {
                    return Err(MmError::arg("direction has the wrong dimension"));
                }
                Ok((0..n).map(|i| s * cloud.point(i).iter().zip(u).map(|(a, b)| a * b).sum::<f64>()).collect())
            }
            Observable::HopfModulus(u) => {
                let (cloud, s) = x.embedding().ok_or(MmError::MissingEmbedding)?;
                if u.len() != cloud.dim() || u.len() % 2 != 0 {
                    return Err(MmError::arg("complex direction has the wrong dimension"));
                }
                Ok((0..n).map(|i| s * hermitian_parts(cloud.point(i), u).2).collect())
            }
            Observable::Values(v) => {
                if v.len() != n {
                    return Err(MmError::arg("value vector has the wrong length"));
                }
                Ok(v.to_vec())
            }
            Observable::Shifted(inner, t) => Ok(inner.evaluate(x)?.into_iter().map(|v| v + t).collect()),
            Observable::Max(parts) | Observable::Min(parts) => {
                let is_max = matches!(self, Observable::Max(_));
                let mut acc: Option<Vec<f64>> = None;
                for p in parts {
                    let v = p.evaluate(x)?;
                    acc = Some(match acc {
                        None => v,
                        Some(a) => {
                            a.into_iter().zip(v).map(|(a, b)| if is_max { a.max(b) } else { a.min(b) }).collect()
                        }
                    });
                }
                acc.ok_or(MmError::EmptyFamily)
            }
        }
    }

    /// `Some(true)` when 1-Lipschitz continuity follows from the construction on this space,
    /// `Some(false)` when the construction is invalid here, `None` when only a numeric check
    /// can decide.
    pub fn lipschitz_by_construction(&self, x: &FiniteMMSpace) -> Option<bool> {
        let kind = x.embedding().map(|(c, _)| c.kind());
        match self {
            Observable::DistanceToPoint(_) | Observable::DistanceToSet(_) => Some(true),
            Observable::Coordinate(_) => Some(matches!(
                kind,
                Some(EmbeddedMetric::Euclidean | EmbeddedMetric::Chebyshev | EmbeddedMetric::SphereGeodesic { .. })
            )),
            Observable::Linear(u) => Some(match kind {
                Some(EmbeddedMetric::Euclidean | EmbeddedMetric::SphereGeodesic { .. }) => norm2(u) <= 1.0 + NORM_SLACK,
                Some(EmbeddedMetric::Chebyshev) => u.iter().map(|a| a.abs()).sum::<f64>() <= 1.0 + NORM_SLACK,
                _ => false,
            }),
            Observable::HopfModulus(u) => Some(match kind {
                Some(EmbeddedMetric::Chebyshev) | None => false,
                Some(_) => norm2(u) <= 1.0 + NORM_SLACK,
            }),
            Observable::Values(_) => None,
            Observable::Shifted(inner, _) => inner.lipschitz_by_construction(x),
            Observable::Max(parts) | Observable::Min(parts) => {
                let mut all = Some(true);
                for p in parts {
                    match p.lipschitz_by_construction(x) {
                        Some(true) => {}
                        Some(false) => return Some(false),
                        None => all = None,
                    }
                }
                all
            }
        }
    }

    /// Numeric check of `|f(x) − f(y)| ≤ d(x, y) + tol` over all pairs.
    pub fn certify(&self, x: &FiniteMMSpace, tol: f64) -> Result<OrderCertificate> {
        let values = self.evaluate(x)?;
        Ok(crate::mm::certify_lipschitz_function(&values, x, tol))
    }
}

/// A finite list of 1-Lipschitz observables standing in for all of them.
#[derive(Clone, Debug, Default)]
pub struct CandidateFamily {
    members: Vec<(Observable, Provenance)>,
}

/// Settings for [`CandidateFamily::default_for`].
#[derive(Clone, Copy, Debug)]
pub struct FamilyConfig {
    /// Random directions for embedded spaces.
    pub directions: usize,
    /// Cap on distance-to-point members; `None` keeps every point.
    pub point_functions: Option<usize>,
    pub seed: u64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        FamilyConfig { directions: 64, point_functions: None, seed: 0 }
    }
}

impl CandidateFamily {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, f: Observable, provenance: Provenance) {
        self.members.push((f, provenance));
    }

    pub fn with(mut self, f: Observable, provenance: Provenance) -> Self {
        self.push(f, provenance);
        self
    }

    pub fn extend(&mut self, other: CandidateFamily) {
        self.members.extend(other.members);
    }

    pub fn members(&self) -> &[(Observable, Provenance)] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// `d(·, x_i)` for every point.
    pub fn distance_functions(x: &FiniteMMSpace) -> Self {
        CandidateFamily {
            members: (0..x.len()).map(|i| (Observable::DistanceToPoint(i), Provenance::DistanceToPoint)).collect(),
        }
    }

    /// `d(·, x_i)` for a seeded subset of `k` points.
    pub fn sampled_distance_functions(x: &FiniteMMSpace, k: usize, seed: u64) -> Self {
        if k >= x.len() {
            return Self::distance_functions(x);
        }
        let mut rng = rng::stream(seed, &[tag::FAMILY, 1]);
        let picks = rand::seq::index::sample(&mut rng, x.len(), k);
        let mut idx: Vec<usize> = picks.into_iter().collect();
        idx.sort_unstable();
        CandidateFamily {
            members: idx.into_iter().map(|i| (Observable::DistanceToPoint(i), Provenance::DistanceToPoint)).collect(),
        }
    }

    /// `d(·, A)` for each given set.
    pub fn set_distances(sets: &[Vec<usize>]) -> Self {
        CandidateFamily {
            members: sets
                .iter()
                .filter(|s| !s.is_empty())
                .map(|s| (Observable::DistanceToSet(s.clone()), Provenance::DistanceToSet))
                .collect(),
        }
    }

    /// Every embedded coordinate.
    pub fn coordinates(dim: usize) -> Self {
        CandidateFamily {
            members: (0..dim).map(|k| (Observable::Coordinate(k), Provenance::LinearProjection)).collect(),
        }
    }

    /// `q` seeded random unit directions in `R^dim` (unit in ℓ1 for the ℓ∞ metric).
    pub fn random_directions(dim: usize, q: usize, l1: bool, seed: u64) -> Self {
        let members = (0..q)
            .map(|b| {
                let u = random_unit(dim, l1, seed, &[tag::FAMILY, 2, b as u64]);
                (Observable::Linear(u), Provenance::RandomDirection)
            })
            .collect();
        CandidateFamily { members }
    }

    /// Moduli of complex coordinates plus `q` seeded random complex unit directions.
    pub fn hopf_moduli(dim: usize, q: usize, seed: u64) -> Self {
        let mut members = Vec::new();
        for k in 0..dim / 2 {
            let mut u = vec![0.0; dim];
            u[2 * k] = 1.0;
            members.push((Observable::HopfModulus(u), Provenance::HopfProjection));
        }
        for b in 0..q {
            let u = random_unit(dim, false, seed, &[tag::FAMILY, 3, b as u64]);
            members.push((Observable::HopfModulus(u), Provenance::HopfProjection));
        }
        CandidateFamily { members }
    }

    /// Distance functions, plus coordinates and random directions (or phase-invariant moduli
    /// for quotient metrics) when coordinates are available.
    pub fn default_for(x: &FiniteMMSpace, config: FamilyConfig) -> Self {
        let mut family = match config.point_functions {
            Some(k) => Self::sampled_distance_functions(x, k, config.seed),
            None => Self::distance_functions(x),
        };
        if let Some((cloud, _)) = x.embedding() {
            match cloud.kind() {
                EmbeddedMetric::Euclidean | EmbeddedMetric::SphereGeodesic { .. } => {
                    family.extend(Self::coordinates(cloud.dim()));
                    family.extend(Self::random_directions(cloud.dim(), config.directions, false, config.seed));
                }
                EmbeddedMetric::Chebyshev => {
                    family.extend(Self::coordinates(cloud.dim()));
                    family.extend(Self::random_directions(cloud.dim(), config.directions, true, config.seed));
                }
                EmbeddedMetric::PhaseQuotient | EmbeddedMetric::FubiniStudy { .. } => {
                    family.extend(Self::hopf_moduli(cloud.dim(), config.directions, config.seed));
                }
            }
        }
        family
    }

    /// Every member evaluated through `f`: `g ∘ f` for a map `f` given by its assignment.
    pub fn pulled_back(&self, x: &FiniteMMSpace, assignment: &[usize]) -> Result<Self> {
        let mut out = CandidateFamily::new();
        for (g, p) in &self.members {
            let v = g.evaluate(x)?;
            let pulled: Arc<[f64]> = assignment.iter().map(|&i| v[i]).collect();
            out.push(Observable::Values(pulled), *p);
        }
        Ok(out)
    }

    /// Check every member. Members that are 1-Lipschitz by construction are spot-checked on
    /// `spot_pairs` seeded pairs; all others get the full quadratic check.
    pub fn certify(&self, x: &FiniteMMSpace, tol: f64, spot_pairs: usize) -> Result<bool> {
        let n = x.len();
        let results: Vec<Result<bool>> = self
            .members
            .par_iter()
            .enumerate()
            .map(|(b, (f, _))| match f.lipschitz_by_construction(x) {
                Some(false) => Ok(false),
                Some(true) => {
                    if n < 2 {
                        return Ok(true);
                    }
                    let v = f.evaluate(x)?;
                    let mut rng = rng::stream(b as u64, &[tag::FAMILY, 4]);
                    Ok((0..spot_pairs).all(|_| {
                        let i = rng.random_range(0..n);
                        let j = rng.random_range(0..n);
                        (v[i] - v[j]).abs() <= x.dist(i, j) + tol
                    }))
                }
                None => Ok(f.certify(x, tol)?.is_1lipschitz),
            })
            .collect();
        for r in results {
            if !r? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub(crate) fn random_unit(dim: usize, l1: bool, seed: u64, tags: &[u64]) -> Vec<f64> {
    let mut rng = rng::stream(seed, tags);
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = if l1 { g.iter().map(|a| a.abs()).sum::<f64>() } else { norm2(&g) };
        if norm > 0.0 {
            return g.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Observable-diameter estimate: the best partial diameter over a family.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ObsDiamEstimate {
    pub value: f64,
    /// Index of the maximizing member.
    pub witness: usize,
    pub provenance: Provenance,
    /// Always true: a finite family only bounds the supremum from below.
    pub lower_bound: bool,
}

/// `max_f diam(f_*μ_X; 1 − κ)` over the family.
pub fn obs_diameter(x: &FiniteMMSpace, kappa: f64, family: &CandidateFamily) -> Result<ObsDiamEstimate> {
    if !(kappa > 0.0 && kappa < 1.0) {
        return Err(MmError::arg(format!("kappa must lie in (0, 1), got {kappa}")));
    }
    if family.is_empty() {
        return Err(MmError::EmptyFamily);
    }
    let alpha = 1.0 - kappa;
    let scores: Vec<Result<f64>> = family
        .members
        .par_iter()
        .map(|(f, _)| {
            let values = f.evaluate(x)?;
            let p = ScalarPushforward::new(values, x.weights().to_vec(), x.grain())?;
            Ok(partial_diameter(&p, alpha))
        })
        .collect();
    let mut best = (f64::NEG_INFINITY, 0usize);
    for (i, s) in scores.into_iter().enumerate() {
        let s = s?;
        if s > best.0 {
            best = (s, i);
        }
    }
    Ok(ObsDiamEstimate { value: best.0, witness: best.1, provenance: family.members[best.1].1, lower_bound: true })
}
