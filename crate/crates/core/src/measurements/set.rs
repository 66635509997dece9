use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{clamp_projection, MeasureOnRN};
use crate::error::{MmError, Result};
use crate::mm::{certify_lipschitz_order, hermitian_parts, point_distance, EmbeddedMetric, FiniteMMSpace, PointMap};
use crate::rng::{self, tag, StreamRng};

/// How one coordinate of a measurement map was built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MemberKind {
    /// `⟨u, x⟩`, or `|⟨u, z⟩_C|` on quotient metrics.
    Direction,
    /// A single embedded coordinate (or complex-coordinate modulus).
    Coordinate,
    /// Distance to a fixed point of the ambient space.
    Anchor,
    /// Distance to a sample point.
    DistanceToPoint,
    /// Pointwise max or min of two other kinds.
    Lattice,
}

/// Finite surrogate for `M(X; N, R)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementSet {
    pub n: usize,
    pub r: f64,
    pub budget: usize,
    pub seed: u64,
    pub members: Vec<MeasureOnRN>,
    /// Per member, the kind of each of its `n` coordinates.
    pub provenance: Vec<Vec<MemberKind>>,
}

/// Source of measurements: one space, or an increasing chain of spaces whose union of
/// measurement sets stands in for the limit pyramid.
#[derive(Clone, Debug)]
pub enum PyramidApprox {
    Space(FiniteMMSpace),
    Chain(Vec<FiniteMMSpace>),
}

impl PyramidApprox {
    /// A chain `X_1 ≺ X_2 ≺ …`, where `maps[i]` sends `spaces[i + 1]` onto `spaces[i]`.
    /// Every link is certified 1-Lipschitz and measure-preserving.
    pub fn chain(spaces: Vec<FiniteMMSpace>, maps: &[PointMap], tol: f64) -> Result<Self> {
        if spaces.is_empty() || maps.len() + 1 != spaces.len() {
            return Err(MmError::arg("a chain of k spaces needs k − 1 links"));
        }
        for (i, f) in maps.iter().enumerate() {
            let cert = certify_lipschitz_order(f, &spaces[i + 1], &spaces[i], tol);
            if !cert.certifies() {
                return Err(MmError::arg(format!("chain link {i} is not a 1-Lipschitz pushforward: {cert:?}")));
            }
        }
        Ok(PyramidApprox::Chain(spaces))
    }

    pub fn spaces(&self) -> &[FiniteMMSpace] {
        match self {
            PyramidApprox::Space(x) => std::slice::from_ref(x),
            PyramidApprox::Chain(xs) => xs,
        }
    }
}

/// Full pairwise certification up to this many points; spot checks beyond.
const FULL_CERTIFY_LIMIT: usize = 4000;
const SPOT_PAIRS: usize = 20_000;
const CERTIFY_TOL: f64 = 1e-9;

struct Ambient<'a> {
    x: &'a FiniteMMSpace,
    kind: EmbeddedMetric,
    dim: usize,
    scale: f64,
    coords: &'a [f64],
    /// Typical coordinate size, for placing anchors.
    spread: f64,
}

impl<'a> Ambient<'a> {
    fn of(x: &'a FiniteMMSpace) -> Option<Self> {
        let (cloud, scale) = x.embedding()?;
        let (dim, coords) = (cloud.dim(), cloud.coords());
        let kind = cloud.kind();
        let spread = match kind {
            EmbeddedMetric::SphereGeodesic { radius } | EmbeddedMetric::FubiniStudy { radius } => radius,
            EmbeddedMetric::PhaseQuotient => cloud.point(0).iter().map(|a| a * a).sum::<f64>().sqrt(),
            EmbeddedMetric::Euclidean | EmbeddedMetric::Chebyshev => {
                (coords.iter().map(|a| a * a).sum::<f64>() / coords.len() as f64).sqrt()
            }
        };
        Some(Ambient { x, kind, dim, scale, coords, spread })
    }

    fn quotient(&self) -> bool {
        matches!(self.kind, EmbeddedMetric::PhaseQuotient | EmbeddedMetric::FubiniStudy { .. })
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        (0..self.x.len())
            .map(|i| {
                let p = self.point(i);
                self.scale
                    * if self.quotient() {
                        hermitian_parts(p, u).2
                    } else {
                        p.iter().zip(u).map(|(a, b)| a * b).sum::<f64>()
                    }
            })
            .collect()
    }
}

/// Gaussian coefficients read from the front of a stream: spaces of different dimension
/// see prefixes of the same vector.
fn coefficients(rng: &mut StreamRng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| rng.sample(StandardNormal)).collect()
}

fn normalize(mut u: Vec<f64>, l1: bool) -> Vec<f64> {
    let norm = if l1 { u.iter().map(|a| a.abs()).sum::<f64>() } else { u.iter().map(|a| a * a).sum::<f64>().sqrt() };
    if norm == 0.0 {
        u[0] = 1.0;
        return u;
    }
    u.iter_mut().for_each(|a| *a /= norm);
    u
}

fn lower_median(values: &[f64], weights: &[f64]) -> f64 {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut acc = 0.0;
    for &i in &order {
        acc += weights[i];
        if acc >= 0.5 - 1e-12 {
            return values[i];
        }
    }
    values[order[order.len() - 1]]
}

/// One 1-Lipschitz function, centered at its median.
fn draw_function(
    x: &FiniteMMSpace,
    ambient: Option<&Ambient>,
    rng: &mut StreamRng,
    lattice: bool,
) -> (Vec<f64>, MemberKind) {
    let pick = if ambient.is_some() { rng.random_range(0..4u32) } else { [3, 3, 4, 4][rng.random_range(0..4usize)] };
    let (values, kind) = match (pick, ambient) {
        (0, Some(a)) => {
            let u = coefficients(rng, a.dim);
            let u = normalize(u, a.kind == EmbeddedMetric::Chebyshev);
            (a.apply(&u), MemberKind::Direction)
        }
        (1, Some(a)) => {
            let j = rng.random_range(0..64usize);
            let mut u = vec![0.0; a.dim];
            if a.quotient() {
                u[2 * (j % (a.dim / 2).max(1))] = 1.0;
            } else {
                u[j % a.dim] = 1.0;
            }
            (a.apply(&u), MemberKind::Coordinate)
        }
        (2, Some(a)) => {
            let p = coefficients(rng, a.dim);
            let p: Vec<f64> = match a.kind {
                EmbeddedMetric::Euclidean | EmbeddedMetric::Chebyshev => p.into_iter().map(|v| v * a.spread).collect(),
                _ => normalize(p, false).into_iter().map(|v| v * a.spread).collect(),
            };
            let values = (0..x.len()).map(|i| a.scale * point_distance(a.kind, a.point(i), &p)).collect();
            (values, MemberKind::Anchor)
        }
        (3, _) if !lattice || ambient.is_none() => {
            let c = rng.random_range(0..x.len());
            ((0..x.len()).map(|i| x.dist(i, c)).collect(), MemberKind::DistanceToPoint)
        }
        _ => {
            if lattice {
                let (f, _) = draw_function(x, ambient, rng, false);
                let (g, _) = draw_function(x, ambient, rng, false);
                let take_max = rng.random_bool(0.5);
                let v = f.iter().zip(&g).map(|(a, b)| if take_max { a.max(*b) } else { a.min(*b) }).collect();
                (v, MemberKind::Lattice)
            } else {
                let c = rng.random_range(0..x.len());
                ((0..x.len()).map(|i| x.dist(i, c)).collect(), MemberKind::DistanceToPoint)
            }
        }
    };
    let mid = lower_median(&values, x.weights());
    (values.into_iter().map(|v| v - mid).collect(), kind)
}

/// Check `|Φ(x) − Φ(y)|_∞ ≤ d(x, y) + tol`: on every pair for small spaces, on seeded
/// random pairs otherwise.
fn certify_map(x: &FiniteMMSpace, coords: &[Vec<f64>], seed: u64, member: usize) -> bool {
    let m = x.len();
    let image = |i: usize, j: usize| coords.iter().map(|f| (f[i] - f[j]).abs()).fold(0.0, f64::max);
    if m <= FULL_CERTIFY_LIMIT {
        return crate::mm::worst_excess(m, |i, j| x.dist(i, j), image).is_none_or(|w| w.2 <= CERTIFY_TOL);
    }
    let mut rng = rng::stream(seed, &[tag::MEASUREMENT, 1, member as u64]);
    (0..SPOT_PAIRS).all(|_| {
        let (i, j) = (rng.random_range(0..m), rng.random_range(0..m));
        image(i, j) <= x.dist(i, j) + CERTIFY_TOL
    })
}

fn member(x: &FiniteMMSpace, n: usize, r: f64, seed: u64, b: usize) -> Result<(MeasureOnRN, Vec<MemberKind>)> {
    let ambient = Ambient::of(x);
    let mut coords = Vec::with_capacity(n);
    let mut kinds = Vec::with_capacity(n);
    for c in 0..n {
        let mut rng = rng::stream(seed, &[tag::MEASUREMENT, 0, b as u64, c as u64]);
        let (f, kind) = draw_function(x, ambient.as_ref(), &mut rng, true);
        coords.push(f);
        kinds.push(kind);
    }
    if !certify_map(x, &coords, seed, b) {
        return Err(MmError::arg(format!("measurement member {b} failed 1-Lipschitz certification")));
    }
    let mut flat = Vec::with_capacity(n * x.len());
    for i in 0..x.len() {
        let q: Vec<f64> = coords.iter().map(|f| f[i]).collect();
        flat.extend(clamp_projection(r, &q));
    }
    Ok((MeasureOnRN::from_weighted(n, flat, x.weights().to_vec(), x.grain())?, kinds))
}

/// `budget` members of `M(X; n, r)` per space of the source. Member `b` depends only on
/// `(seed, b)`, so smaller budgets give prefixes of larger ones, and equal seeds apply the
/// same recipes to different spaces.
pub fn measurement_set(source: &PyramidApprox, n: usize, r: f64, budget: usize, seed: u64) -> Result<MeasurementSet> {
    if n == 0 || budget == 0 || !(r >= 0.0) {
        return Err(MmError::arg("measurement sets need n ≥ 1, budget ≥ 1 and R ≥ 0"));
    }
    let jobs: Vec<(usize, usize)> = (0..source.spaces().len()).flat_map(|s| (0..budget).map(move |b| (s, b))).collect();
    let built: Vec<(MeasureOnRN, Vec<MemberKind>)> =
        jobs.par_iter().map(|&(s, b)| member(&source.spaces()[s], n, r, seed, b)).collect::<Result<_>>()?;
    let (members, provenance) = built.into_iter().unzip();
    Ok(MeasurementSet { n, r, budget, seed, members, provenance })
}
