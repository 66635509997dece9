use std::cmp::Ordering;

use rayon::prelude::*;

use super::{bisect_float, scan_levels};
use crate::error::{MmError, Result};
use crate::flow::bipartite_flow;
use crate::invariants::ScalarPushforward;
use crate::measurements::MeasureOnRN;
use crate::mm::FiniteMMSpace;
use crate::numeric::{compensated_sum, MASS_SLACK};

/// Largest number of cross pairs the dense engine will hold in memory.
pub const DENSE_PAIR_LIMIT: usize = 8_000_000;

/// A probability measure on the points of a fixed finite metric space.
#[derive(Clone, Debug)]
pub struct MeasureOnCommonSpace<'a> {
    ground: &'a FiniteMMSpace,
    weights: Vec<f64>,
    grain: Option<u64>,
}

impl<'a> MeasureOnCommonSpace<'a> {
    pub fn new(ground: &'a FiniteMMSpace, weights: Vec<f64>) -> Result<Self> {
        Self::with_grain(ground, weights, None)
    }

    /// `grain` marks weights that are exact multiples of `1 / grain`.
    pub fn with_grain(ground: &'a FiniteMMSpace, weights: Vec<f64>, grain: Option<u64>) -> Result<Self> {
        if weights.len() != ground.len() {
            return Err(MmError::arg("weights do not match the ground set"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(MmError::arg("negative weight"));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(MmError::arg(format!("measure has mass {total}")));
        }
        Ok(MeasureOnCommonSpace { ground, weights, grain })
    }

    /// The space's own measure.
    pub fn of(ground: &'a FiniteMMSpace) -> Self {
        MeasureOnCommonSpace { ground, weights: ground.weights().to_vec(), grain: ground.grain() }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ground(&self) -> &FiniteMMSpace {
        self.ground
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Side capacities for the transport network: integer units when both sides have a grain.
pub(crate) struct Capacities {
    pub(crate) left: Vec<f64>,
    pub(crate) right: Vec<f64>,
    pub(crate) total: f64,
    pub(crate) eps: f64,
}

impl Capacities {
    pub(crate) fn new(a: &[f64], ga: Option<u64>, b: &[f64], gb: Option<u64>) -> Self {
        if let (Some(ga), Some(gb)) = (ga, gb) {
            let l = ga / gcd(ga, gb) * gb;
            if l < (1u64 << 52) {
                let (sa, sb) = ((l / ga) as f64, (l / gb) as f64);
                return Capacities {
                    left: a.iter().map(|w| (w * ga as f64).round() * sa).collect(),
                    right: b.iter().map(|w| (w * gb as f64).round() * sb).collect(),
                    total: l as f64,
                    eps: 0.0,
                };
            }
        }
        Capacities { left: a.to_vec(), right: b.to_vec(), total: 1.0, eps: 1e-15 }
    }

    /// Unmatched mass fraction for a given flow. Float capacities snap residues below
    /// `MASS_SLACK` to zero.
    pub(crate) fn shortfall(&self, flow: f64) -> f64 {
        let s = ((self.total - flow) / self.total).max(0.0);
        if self.eps > 0.0 && s <= MASS_SLACK {
            0.0
        } else {
            s
        }
    }
}

/// Dense engine over an explicit cross-distance function between positive atoms.
pub(crate) struct Dense {
    caps: Capacities,
    pairs: Vec<(f64, u32, u32)>,
    levels: Vec<f64>,
    ends: Vec<usize>,
}

impl Dense {
    pub(crate) fn new(caps: Capacities, d: impl Fn(usize, usize) -> f64 + Sync) -> Result<Self> {
        let (na, nb) = (caps.left.len(), caps.right.len());
        if na.saturating_mul(nb) > DENSE_PAIR_LIMIT {
            return Err(MmError::Resource(format!(
                "dense Prokhorov solve needs {na} x {nb} cross distances (limit {DENSE_PAIR_LIMIT})"
            )));
        }
        let mut pairs: Vec<(f64, u32, u32)> = (0..na)
            .into_par_iter()
            .flat_map_iter(|i| {
                let d = &d;
                (0..nb).filter_map(move |j| {
                    let v = d(i, j);
                    (v < 1.0).then_some((v, i as u32, j as u32))
                })
            })
            .collect();
        pairs.par_sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut levels = Vec::new();
        let mut ends = Vec::new();
        if pairs.first().is_none_or(|p| p.0 > 0.0) {
            levels.push(0.0);
            ends.push(0);
        }
        for (k, p) in pairs.iter().enumerate() {
            if levels.last() == Some(&p.0) {
                *ends.last_mut().expect("level open") = k + 1;
            } else {
                levels.push(p.0);
                ends.push(k + 1);
            }
        }
        Ok(Dense { caps, pairs, levels, ends })
    }

    fn flow_upto(&self, end: usize) -> f64 {
        bipartite_flow(
            &self.caps.left,
            &self.caps.right,
            self.pairs[..end].iter().map(|p| (p.1 as usize, p.2 as usize)),
            self.caps.eps,
        )
    }

    pub(crate) fn distance(&self) -> f64 {
        scan_levels(&self.levels, |j| self.caps.shortfall(self.flow_upto(self.ends[j])))
    }
}

/// Maximum mass movable by at most `eps` between two measures on the line (in capacity units).
fn line_flow(a: &[f64], ca: &[f64], b: &[f64], cb: &[f64], eps: f64) -> f64 {
    let mut rem = cb.to_vec();
    let mut p = 0usize;
    let mut total = 0.0;
    for (i, &x) in a.iter().enumerate() {
        let mut r = ca[i];
        while r > 0.0 && p < b.len() {
            if rem[p] <= 0.0 || x - b[p] > eps {
                p += 1;
                continue;
            }
            if b[p] - x > eps {
                break;
            }
            let take = r.min(rem[p]);
            r -= take;
            rem[p] -= take;
            total += take;
        }
    }
    total
}

/// Exact `d_P` between two measures on the real line, `O(m)` per feasibility check.
pub fn prokhorov_line(a: &ScalarPushforward, b: &ScalarPushforward) -> f64 {
    let (a, b) = if cmp_scalar(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
    let caps = Capacities::new(a.weights(), a.grain(), b.weights(), b.grain());
    bisect_float(|eps| caps.shortfall(line_flow(a.values(), &caps.left, b.values(), &caps.right, eps)) <= eps)
}

/// Is `d_P(a, b) ≤ eps` on the line?
pub fn prokhorov_line_at_most(a: &ScalarPushforward, b: &ScalarPushforward, eps: f64) -> bool {
    let (a, b) = if cmp_scalar(a, b) == Ordering::Greater { (b, a) } else { (a, b) };
    let caps = Capacities::new(a.weights(), a.grain(), b.weights(), b.grain());
    eps >= 1.0 || caps.shortfall(line_flow(a.values(), &caps.left, b.values(), &caps.right, eps)) <= eps
}

fn cmp_bits(a: &[f64], b: &[f64]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.iter().map(|v| v.to_bits()).cmp(b.iter().map(|v| v.to_bits())))
}

fn cmp_scalar(a: &ScalarPushforward, b: &ScalarPushforward) -> Ordering {
    cmp_bits(a.values(), b.values()).then_with(|| cmp_bits(a.weights(), b.weights()))
}

fn cmp_rn(a: &MeasureOnRN, b: &MeasureOnRN) -> Ordering {
    cmp_bits(a.points(), b.points()).then_with(|| cmp_bits(a.weights(), b.weights()))
}

fn dense_rn<'m>(a: &'m MeasureOnRN, b: &'m MeasureOnRN) -> Result<Dense> {
    let caps = Capacities::new(a.weights(), a.grain(), b.weights(), b.grain());
    Dense::new(caps, |i, j| a.cross_distance(i, b, j))
}

fn canonical<'m>(a: &'m MeasureOnRN, b: &'m MeasureOnRN) -> Result<(&'m MeasureOnRN, &'m MeasureOnRN)> {
    if a.dim() != b.dim() {
        return Err(MmError::GroundMismatch);
    }
    Ok(if cmp_rn(a, b) == Ordering::Greater { (b, a) } else { (a, b) })
}

/// Exact `d_P` on `(R^N, ℓ∞)`. One-dimensional inputs use the line engine.
pub fn prokhorov_rn(a: &MeasureOnRN, b: &MeasureOnRN) -> Result<f64> {
    let (a, b) = canonical(a, b)?;
    if a.dim() == 1 {
        return Ok(prokhorov_line(&a.marginal(0), &b.marginal(0)));
    }
    Ok(dense_rn(a, b)?.distance())
}

/// Is `d_P(a, b) ≤ eps` on `(R^N, ℓ∞)`? One max-flow.
pub fn prokhorov_rn_at_most(a: &MeasureOnRN, b: &MeasureOnRN, eps: f64) -> Result<bool> {
    let (a, b) = canonical(a, b)?;
    if a.dim() == 1 {
        return Ok(prokhorov_line_at_most(&a.marginal(0), &b.marginal(0), eps));
    }
    if eps >= 1.0 {
        return Ok(true);
    }
    let caps = Capacities::new(a.weights(), a.grain(), b.weights(), b.grain());
    let edges: Vec<(usize, usize)> = (0..a.len())
        .into_par_iter()
        .flat_map_iter(|i| (0..b.len()).filter(move |&j| a.cross_distance(i, b, j) <= eps).map(move |j| (i, j)))
        .collect();
    let flow = bipartite_flow(&caps.left, &caps.right, edges.into_iter(), caps.eps);
    Ok(caps.shortfall(flow) <= eps)
}

/// Lower bound on `d_P` from coordinate marginals (coordinates are 1-Lipschitz for ℓ∞).
pub fn prokhorov_rn_lower_bound(a: &MeasureOnRN, b: &MeasureOnRN) -> Result<f64> {
    let (a, b) = canonical(a, b)?;
    Ok((0..a.dim()).map(|c| prokhorov_line(&a.marginal(c), &b.marginal(c))).fold(0.0, f64::max))
}

/// Exact `d_P(μ, ν)` for two measures on one finite metric space.
pub fn prokhorov(mu: &MeasureOnCommonSpace<'_>, nu: &MeasureOnCommonSpace<'_>) -> Result<f64> {
    if !std::ptr::eq(mu.ground, nu.ground) {
        return Err(MmError::GroundMismatch);
    }
    let x = mu.ground;
    let ia: Vec<usize> = (0..x.len()).filter(|&i| mu.weights[i] > 0.0).collect();
    let ib: Vec<usize> = (0..x.len()).filter(|&i| nu.weights[i] > 0.0).collect();
    let wa: Vec<f64> = ia.iter().map(|&i| mu.weights[i]).collect();
    let wb: Vec<f64> = ib.iter().map(|&i| nu.weights[i]).collect();
    let caps = Capacities::new(&wa, mu.grain, &wb, nu.grain);
    Ok(Dense::new(caps, |i, j| x.dist(ia[i], ib[j]))?.distance())
}
