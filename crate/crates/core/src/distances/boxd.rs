use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::prokhorov::Capacities;
use super::{bisect_float, scan_levels};
use crate::error::{MmError, Result};
use crate::flow::{bipartite_flow, bipartite_flow_with};
use crate::mm::{Coupling, FiniteMMSpace};
use crate::rng::{self, tag};

/// Largest `|X|·|Y|` accepted by [`box_exact_tiny`].
pub const BOX_TINY_LIMIT: usize = 25;

/// Largest coupling support whose pairwise distortions are tabulated once per evaluation.
const SUPPORT_MATRIX_LIMIT: usize = 4096;

/// `|d_X(x, x') − d_Y(y, y')|` for atoms `a = (x, y)`, `b = (x', y')` of `X × Y`.
#[inline]
fn distortion(x: &FiniteMMSpace, y: &FiniteMMSpace, a: (usize, usize), b: (usize, usize)) -> f64 {
    (x.dist(a.0, b.0) - y.dist(a.1, b.1)).abs()
}

fn flow_on(caps: &Capacities, atoms: impl Iterator<Item = (usize, usize)>) -> f64 {
    bipartite_flow(&caps.left, &caps.right, atoms, caps.eps)
}

/// Maximal cliques of a graph on at most 64 vertices (Bron–Kerbosch with pivoting).
fn maximal_cliques(adj: &[u64]) -> Vec<u64> {
    fn rec(adj: &[u64], r: u64, mut p: u64, mut x: u64, out: &mut Vec<u64>) {
        if p == 0 && x == 0 {
            out.push(r);
            return;
        }
        let pivot = (p | x).trailing_zeros() as usize;
        let mut cand = p & !adj[pivot];
        while cand != 0 {
            let v = cand.trailing_zeros() as usize;
            let bit = 1u64 << v;
            rec(adj, r | bit, p & adj[v], x & adj[v], out);
            p &= !bit;
            x |= bit;
            cand &= !bit;
        }
    }
    let n = adj.len();
    let all = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let mut out = Vec::new();
    rec(adj, 0, all, 0, &mut out);
    out
}

/// Exact box distance for tiny spaces. Parameters of finite spaces are replaced by couplings;
/// the non-exceptional part of a coupling is a sub-coupling supported on a set of atoms with
/// pairwise distortion `≤ ε`, so the value is the least `ε` with
/// `1 − max_T flow(T) ≤ ε` over cliques `T` of the `ε`-compatibility graph.
pub fn box_exact_tiny(x: &FiniteMMSpace, y: &FiniteMMSpace) -> Result<f64> {
    let size = x.len() * y.len();
    if size > BOX_TINY_LIMIT {
        return Err(MmError::SizeGuard { what: "|X|·|Y|", actual: size, limit: BOX_TINY_LIMIT });
    }
    let atoms: Vec<(usize, usize)> = (0..x.len()).flat_map(|i| (0..y.len()).map(move |j| (i, j))).collect();
    let n = atoms.len();
    let caps = Capacities::new(x.weights(), x.grain(), y.weights(), y.grain());
    let mut dist = vec![0.0; n * n];
    let mut levels = vec![0.0];
    for a in 0..n {
        for b in 0..n {
            let d = distortion(x, y, atoms[a], atoms[b]);
            dist[a * n + b] = d;
            if d < 1.0 {
                levels.push(d);
            }
        }
    }
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let shortfall = |eps: f64| {
        let adj: Vec<u64> = (0..n)
            .map(|a| (0..n).filter(|&b| b != a && dist[a * n + b] <= eps).fold(0u64, |m, b| m | (1 << b)))
            .collect();
        let best = maximal_cliques(&adj)
            .into_iter()
            .map(|c| flow_on(&caps, (0..n).filter(|&a| c >> a & 1 == 1).map(|a| atoms[a])))
            .fold(0.0, f64::max);
        caps.shortfall(best)
    };
    Ok(scan_levels(&levels, |j| shortfall(levels[j])))
}

/// Result of the local search.
#[derive(Clone, Debug, Serialize)]
pub struct BoxUpper {
    pub value: f64,
    /// A coupling whose non-exceptional part witnesses `value`.
    pub coupling: Coupling,
}

#[derive(Clone, Copy, Debug)]
pub struct BoxConfig {
    pub restarts: usize,
    /// Hill-climbing moves per restart.
    pub moves: usize,
    /// Support size up to which exclusion sets are searched exhaustively.
    pub exhaustive_support: usize,
    pub seed: u64,
}

impl Default for BoxConfig {
    fn default() -> Self {
        BoxConfig { restarts: 16, moves: 64, exhaustive_support: 12, seed: 0 }
    }
}

/// North-west corner rule on permuted rows and columns: a vertex of the transportation polytope.
fn north_west(caps: &Capacities, rows: &[usize], cols: &[usize]) -> Vec<(usize, usize, f64)> {
    let mut r: Vec<f64> = caps.left.clone();
    let mut c: Vec<f64> = caps.right.clone();
    let (mut p, mut q) = (0, 0);
    let mut out = Vec::new();
    while p < rows.len() && q < cols.len() {
        let (i, j) = (rows[p], cols[q]);
        let t = r[i].min(c[j]);
        if t > caps.eps {
            out.push((i, j, t));
        }
        r[i] -= t;
        c[j] -= t;
        if r[i] <= caps.eps {
            p += 1;
        } else {
            q += 1;
        }
    }
    out
}

struct Evaluator<'a> {
    x: &'a FiniteMMSpace,
    y: &'a FiniteMMSpace,
    caps: Capacities,
    exhaustive: usize,
}

/// Largest internal distortion and total mass of every subset of a small support.
struct SubsetTable {
    max_distortion: Vec<f64>,
    mass: Vec<f64>,
}

impl Evaluator<'_> {
    fn compatible(&self, a: (usize, usize), b: (usize, usize), eps: f64) -> bool {
        distortion(self.x, self.y, a, b) <= eps
    }

    fn subsets(&self, support: &[(usize, usize, f64)]) -> SubsetTable {
        let s = support.len();
        let mut max_distortion = vec![0.0f64; 1 << s];
        let mut mass = vec![0.0f64; 1 << s];
        for mask in 1usize..(1 << s) {
            let top = usize::BITS - 1 - mask.leading_zeros();
            let rest = mask & !(1 << top);
            let a = support[top as usize];
            let mut d = max_distortion[rest];
            let mut r = rest;
            while r != 0 {
                let b = support[r.trailing_zeros() as usize];
                d = d.max(distortion(self.x, self.y, (a.0, a.1), (b.0, b.1)));
                r &= r - 1;
            }
            max_distortion[mask] = d;
            mass[mask] = mass[rest] + a.2;
        }
        SubsetTable { max_distortion, mass }
    }

    /// Pairwise distortions of the support atoms, row-major, when the support is small enough.
    fn support_distortions(&self, support: &[(usize, usize, f64)]) -> Option<Vec<f64>> {
        let s = support.len();
        (s <= SUPPORT_MATRIX_LIMIT).then(|| {
            (0..s * s)
                .into_par_iter()
                .map(|k| {
                    let (a, b) = (support[k / s], support[k % s]);
                    distortion(self.x, self.y, (a.0, a.1), (b.0, b.1))
                })
                .collect()
        })
    }

    /// Heaviest clique found inside the support at threshold `eps`.
    fn clique(
        &self,
        support: &[(usize, usize, f64)],
        table: Option<&SubsetTable>,
        dmat: Option<&[f64]>,
        eps: f64,
    ) -> Vec<usize> {
        let s = support.len();
        if let Some(t) = table {
            let mut best = (f64::NEG_INFINITY, 0usize);
            for mask in 0..(1usize << s) {
                if t.max_distortion[mask] <= eps && t.mass[mask] > best.0 {
                    best = (t.mass[mask], mask);
                }
            }
            return (0..s).filter(|&k| best.1 >> k & 1 == 1).collect();
        }
        let pair = |a: usize, b: usize| match dmat {
            Some(d) => d[a * s + b],
            None => distortion(self.x, self.y, (support[a].0, support[a].1), (support[b].0, support[b].1)),
        };
        // greedy removal of the atom in conflict with the most mass
        let mut conflicts: Vec<Vec<usize>> = vec![Vec::new(); s];
        let mut conflict = vec![0.0; s];
        for a in 0..s {
            for b in (a + 1)..s {
                if pair(a, b) > eps {
                    conflicts[a].push(b);
                    conflicts[b].push(a);
                    conflict[a] += support[b].2;
                    conflict[b] += support[a].2;
                }
            }
        }
        let mut alive = vec![true; s];
        let mut degree: Vec<usize> = conflicts.iter().map(Vec::len).collect();
        while let Some(worst) = (0..s)
            .filter(|&k| alive[k] && degree[k] > 0)
            .max_by(|&p, &q| (conflict[p] / support[p].2).total_cmp(&(conflict[q] / support[q].2)).then(q.cmp(&p)))
        {
            alive[worst] = false;
            for &b in &conflicts[worst] {
                if alive[b] {
                    conflict[b] -= support[worst].2;
                    degree[b] -= 1;
                }
            }
        }
        (0..s).filter(|&k| alive[k]).collect()
    }

    /// Mass of the best sub-coupling found at threshold `eps`: clique in the support, grown by
    /// atoms of `X × Y` compatible with all of it, then re-flowed.
    fn mass_at(
        &self,
        support: &[(usize, usize, f64)],
        table: Option<&SubsetTable>,
        dmat: Option<&[f64]>,
        eps: f64,
    ) -> (f64, Vec<(usize, usize, f64)>) {
        let mut atoms: Vec<(usize, usize)> =
            self.clique(support, table, dmat, eps).into_iter().map(|k| (support[k].0, support[k].1)).collect();
        if self.x.len() * self.y.len() <= 4096 {
            for i in 0..self.x.len() {
                for j in 0..self.y.len() {
                    if !atoms.contains(&(i, j)) && atoms.iter().all(|&a| self.compatible(a, (i, j), eps)) {
                        atoms.push((i, j));
                    }
                }
            }
        }
        let (flow, flows) = bipartite_flow_with(&self.caps.left, &self.caps.right, atoms.into_iter(), self.caps.eps);
        (flow, flows.into_iter().filter(|e| e.2 > 0.0).collect())
    }

    /// Smallest `ε` certified by this coupling, with the sub-coupling realizing it.
    fn value(&self, support: &[(usize, usize, f64)]) -> (f64, Vec<(usize, usize, f64)>) {
        let table = (support.len() <= self.exhaustive).then(|| self.subsets(support));
        let table = table.as_ref();
        let dmat = if table.is_none() { self.support_distortions(support) } else { None };
        let dmat = dmat.as_deref();
        let (nx, ny) = (self.x.len(), self.y.len());
        if nx * ny <= 64 {
            // the found mass only changes at distortion values, so try each of them
            let mut levels = vec![0.0];
            for a in 0..nx * ny {
                for b in (a + 1)..nx * ny {
                    let d = distortion(self.x, self.y, (a / ny, a % ny), (b / ny, b % ny));
                    if d < 1.0 {
                        levels.push(d);
                    }
                }
            }
            levels.sort_by(f64::total_cmp);
            levels.dedup();
            let mut best = (1.0, Vec::new());
            for &l in &levels {
                if l >= best.0 {
                    break;
                }
                let (flow, sub) = self.mass_at(support, table, dmat, l);
                let v = l.max(self.caps.shortfall(flow));
                if v < best.0 {
                    best = (v, sub);
                }
            }
            return best;
        }
        let eps = bisect_float(|eps| self.caps.shortfall(self.mass_at(support, table, dmat, eps).0) <= eps);
        let (_, sub) = self.mass_at(support, table, dmat, eps);
        (eps, sub)
    }
}

/// Complete a sub-coupling (in capacity units) to a full coupling in probability units.
fn complete(caps: &Capacities, sub: &[(usize, usize, f64)], rows: usize, cols: usize) -> Coupling {
    let mut mass = vec![0.0; rows * cols];
    let mut r = caps.left.clone();
    let mut c = caps.right.clone();
    for &(i, j, f) in sub {
        mass[i * cols + j] += f;
        r[i] -= f;
        c[j] -= f;
    }
    let residual = Capacities { left: r, right: c, total: caps.total, eps: caps.eps };
    let order_r: Vec<usize> = (0..rows).collect();
    let order_c: Vec<usize> = (0..cols).collect();
    for (i, j, t) in north_west(&residual, &order_r, &order_c) {
        mass[i * cols + j] += t;
    }
    Coupling { rows, cols, mass: mass.into_iter().map(|m| m / caps.total).collect() }
}

/// Upper bound on the box distance by local search over couplings.
pub fn box_upper(x: &FiniteMMSpace, y: &FiniteMMSpace, config: BoxConfig) -> BoxUpper {
    let caps = Capacities::new(x.weights(), x.grain(), y.weights(), y.grain());
    let eval = Evaluator { x, y, caps, exhaustive: config.exhaustive_support };
    let (nx, ny) = (x.len(), y.len());
    let identity_r: Vec<usize> = (0..nx).collect();
    let identity_c: Vec<usize> = (0..ny).collect();
    // start orders: identity, then points sorted by distance to a reference point
    let by_profile = |s: &FiniteMMSpace| {
        let mut o: Vec<usize> = (0..s.len()).collect();
        let total: Vec<f64> = (0..s.len()).map(|i| (0..s.len()).map(|j| s.dist(i, j) * s.weights()[j]).sum()).collect();
        o.sort_by(|&a, &b| total[a].total_cmp(&total[b]).then(a.cmp(&b)));
        o
    };
    let mut starts: Vec<(Vec<usize>, Vec<usize>)> =
        vec![(identity_r.clone(), identity_c.clone()), (by_profile(x), by_profile(y))];
    for r in 0..config.restarts {
        let mut rng = rng::stream(config.seed, &[tag::BOX, r as u64]);
        let mut rows = identity_r.clone();
        let mut cols = identity_c.clone();
        rows.shuffle(&mut rng);
        cols.shuffle(&mut rng);
        starts.push((rows, cols));
    }
    let results: Vec<(f64, Vec<(usize, usize, f64)>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(s, (mut rows, mut cols))| {
            let mut rng = rng::stream(config.seed, &[tag::BOX, 1 << 32 | s as u64]);
            let mut best = eval.value(&north_west(&eval.caps, &rows, &cols));
            for _ in 0..config.moves {
                if best.0 == 0.0 {
                    break;
                }
                let (mut r2, mut c2) = (rows.clone(), cols.clone());
                if rng.random_bool(0.5) && nx > 1 {
                    let (a, b) = (rng.random_range(0..nx), rng.random_range(0..nx));
                    r2.swap(a, b);
                } else if ny > 1 {
                    let (a, b) = (rng.random_range(0..ny), rng.random_range(0..ny));
                    c2.swap(a, b);
                }
                let cand = eval.value(&north_west(&eval.caps, &r2, &c2));
                if cand.0 <= best.0 {
                    best = cand;
                    rows = r2;
                    cols = c2;
                }
            }
            best
        })
        .collect();
    let mut best = results[0].clone();
    for r in results.into_iter().skip(1) {
        if r.0 < best.0 {
            best = r;
        }
    }
    BoxUpper { value: best.0, coupling: complete(&eval.caps, &best.1, nx, ny) }
}
