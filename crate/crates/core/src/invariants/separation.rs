use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MmError, Result};
use crate::mm::FiniteMMSpace;
use crate::numeric::{cmp_f64, MASS_SLACK};
use crate::rng::{self, tag};

/// Separation distance with the sets that realize it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Separation {
    pub value: f64,
    /// One index set per κ, in the order given.
    pub witness_sets: Vec<Vec<usize>>,
    /// False when the value is only a lower bound (several sets, or search budget exhausted).
    pub exact: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct SeparationConfig {
    /// Search-tree nodes allowed for the exact two-set solver before falling back.
    pub node_budget: usize,
    /// Sweep functions tried by the heuristic.
    pub sweeps: usize,
    pub seed: u64,
}

impl Default for SeparationConfig {
    fn default() -> Self {
        SeparationConfig { node_budget: 2_000_000, sweeps: 32, seed: 0 }
    }
}

/// Mass bookkeeping, exact for spaces with a grain.
#[derive(Clone)]
struct Masses {
    units: Vec<u64>,
    weights: Vec<f64>,
    exact: bool,
}

impl Masses {
    fn of(x: &FiniteMMSpace) -> Self {
        match x.grain() {
            Some(g) => Masses {
                units: x.weights().iter().map(|w| (w * g as f64).round() as u64).collect(),
                weights: x.weights().to_vec(),
                exact: true,
            },
            None => Masses { units: Vec::new(), weights: x.weights().to_vec(), exact: false },
        }
    }

    fn target(&self, kappa: f64, grain: Option<u64>) -> Need {
        match (self.exact, grain) {
            (true, Some(g)) => {
                let t = (kappa * g as f64 - 1e-9).ceil();
                Need::Units(if t <= 0.0 { 0 } else { t as u64 })
            }
            _ => Need::Mass(kappa - MASS_SLACK),
        }
    }
}

#[derive(Clone, Copy)]
enum Need {
    Units(u64),
    Mass(f64),
}

#[derive(Clone, Copy, Default)]
struct Acc {
    units: u64,
    mass: f64,
}

impl Acc {
    fn add(&mut self, m: &Masses, i: usize) {
        if m.exact {
            self.units += m.units[i];
        }
        self.mass += m.weights[i];
    }

    fn meets(&self, need: Need) -> bool {
        match need {
            Need::Units(u) => self.units >= u,
            Need::Mass(a) => self.mass >= a,
        }
    }
}

/// Largest `t` with `μ{dmin ≥ t} ≥ κ`, and the points achieving it.
fn upper_quantile(dmin: &[f64], masses: &Masses, need: Need, order: &mut Vec<usize>) -> f64 {
    order.clear();
    order.extend(0..dmin.len());
    order.sort_by(|&a, &b| cmp_f64(&dmin[b], &dmin[a]).then(a.cmp(&b)));
    let mut acc = Acc::default();
    for &i in order.iter() {
        acc.add(masses, i);
        if acc.meets(need) {
            return dmin[i];
        }
    }
    0.0
}

fn far_set(dmin: &[f64], t: f64) -> Vec<usize> {
    (0..dmin.len()).filter(|&i| dmin[i] >= t).collect()
}

struct Search<'a> {
    x: &'a FiniteMMSpace,
    masses: Masses,
    need0: Need,
    need1: Need,
    suffix: Vec<Acc>,
    nodes: usize,
    budget: usize,
    best: f64,
    best_set: Vec<usize>,
    scratch: Vec<usize>,
}

impl Search<'_> {
    fn run(&mut self, start: usize, set: &mut Vec<usize>, acc: Acc, dmin: &[f64]) -> bool {
        let n = self.x.len();
        for k in start..n {
            self.nodes += 1;
            if self.nodes > self.budget {
                return false;
            }
            // enough mass left to reach the first target?
            let mut reach = acc;
            reach.units += self.suffix[k].units;
            reach.mass += self.suffix[k].mass;
            if !reach.meets(self.need0) {
                break;
            }
            let mut next = dmin.to_vec();
            for (i, d) in next.iter_mut().enumerate() {
                let v = self.x.dist(i, k);
                if v < *d {
                    *d = v;
                }
            }
            let bound = upper_quantile(&next, &self.masses, self.need1, &mut self.scratch);
            if bound <= self.best && !self.best_set.is_empty() {
                continue;
            }
            let mut acc2 = acc;
            acc2.add(&self.masses, k);
            set.push(k);
            if acc2.meets(self.need0) {
                if bound > self.best || self.best_set.is_empty() {
                    self.best = bound;
                    self.best_set = set.clone();
                }
            } else if !self.run(k + 1, set, acc2, &next) {
                return false;
            }
            set.pop();
        }
        true
    }
}

/// Exact two-set separation by enumerating minimal first sets; `None` if the budget runs out.
fn separation_two(x: &FiniteMMSpace, k0: f64, k1: f64, budget: usize) -> Option<Separation> {
    let n = x.len();
    let masses = Masses::of(x);
    // enumerate the set with the smaller mass requirement
    let swap = k1 < k0;
    let (ka, kb) = if swap { (k1, k0) } else { (k0, k1) };
    let need0 = masses.target(ka, x.grain());
    let need1 = masses.target(kb, x.grain());
    let mut suffix = vec![Acc::default(); n + 1];
    for k in (0..n).rev() {
        let mut a = suffix[k + 1];
        a.add(&masses, k);
        suffix[k] = a;
    }
    let mut search = Search {
        x,
        masses,
        need0,
        need1,
        suffix,
        nodes: 0,
        budget,
        best: 0.0,
        best_set: Vec::new(),
        scratch: Vec::with_capacity(n),
    };
    let dmin = vec![f64::INFINITY; n];
    let mut set = Vec::new();
    if !search.run(0, &mut set, Acc::default(), &dmin) {
        return None;
    }
    let a = search.best_set;
    if a.is_empty() {
        return Some(Separation { value: 0.0, witness_sets: vec![Vec::new(), Vec::new()], exact: true });
    }
    let dmin: Vec<f64> = (0..n).map(|i| a.iter().map(|&c| x.dist(i, c)).fold(f64::INFINITY, f64::min)).collect();
    let mut scratch = Vec::new();
    let t = upper_quantile(&dmin, &search.masses, need1, &mut scratch);
    let b = far_set(&dmin, t);
    let witness_sets = if swap { vec![b, a] } else { vec![a, b] };
    Some(Separation { value: t, witness_sets, exact: true })
}

fn set_distance(x: &FiniteMMSpace, a: &[usize], b: &[usize]) -> f64 {
    let mut d = f64::INFINITY;
    for &i in a {
        for &j in b {
            d = d.min(x.dist(i, j));
        }
    }
    d
}

/// Sweep heuristic: order points by a function, cut the order into consecutive groups of the
/// prescribed masses with equal slack between them, and measure the true set distances.
fn sweep(x: &FiniteMMSpace, order: &[usize], kappas: &[f64]) -> Option<(f64, Vec<Vec<usize>>)> {
    let masses = Masses::of(x);
    let total_k: f64 = kappas.iter().sum();
    let slack = (1.0 - total_k).max(0.0);
    let gaps = kappas.len() - 1;
    let gap = slack / gaps as f64;
    let mut sets = Vec::with_capacity(kappas.len());
    let mut pos = 0usize;
    for (g, &k) in kappas.iter().enumerate() {
        if g > 0 {
            // skip roughly `gap` mass
            let mut skipped = 0.0;
            while pos < order.len() && skipped + masses.weights[order[pos]] <= gap + MASS_SLACK {
                skipped += masses.weights[order[pos]];
                pos += 1;
            }
        }
        let need = masses.target(k, x.grain());
        let mut acc = Acc::default();
        let mut set = Vec::new();
        while pos < order.len() && !acc.meets(need) {
            acc.add(&masses, order[pos]);
            set.push(order[pos]);
            pos += 1;
        }
        if !acc.meets(need) {
            return None;
        }
        sets.push(set);
    }
    let mut value = f64::INFINITY;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            value = value.min(set_distance(x, &sets[i], &sets[j]));
        }
    }
    Some((value, sets))
}

/// Balls of the prescribed masses around greedily chosen far-apart centers.
fn farthest_balls(x: &FiniteMMSpace, first: usize, kappas: &[f64]) -> Option<(f64, Vec<Vec<usize>>)> {
    let n = x.len();
    let masses = Masses::of(x);
    let mut taken = vec![false; n];
    let mut dmin = vec![f64::INFINITY; n];
    let mut center = first;
    let mut sets = Vec::with_capacity(kappas.len());
    for (g, &k) in kappas.iter().enumerate() {
        if g > 0 {
            center = (0..n).filter(|&i| !taken[i]).max_by(|&a, &b| cmp_f64(&dmin[a], &dmin[b]).then(b.cmp(&a)))?;
        }
        let mut order: Vec<usize> = (0..n).filter(|&i| !taken[i]).collect();
        order.sort_by(|&a, &b| cmp_f64(&x.dist(a, center), &x.dist(b, center)).then(a.cmp(&b)));
        let need = masses.target(k, x.grain());
        let mut acc = Acc::default();
        let mut set = Vec::new();
        for &i in &order {
            if acc.meets(need) {
                break;
            }
            acc.add(&masses, i);
            set.push(i);
        }
        if !acc.meets(need) {
            return None;
        }
        for &i in &set {
            taken[i] = true;
            for (j, d) in dmin.iter_mut().enumerate() {
                *d = d.min(x.dist(i, j));
            }
        }
        sets.push(set);
    }
    let mut value = f64::INFINITY;
    for i in 0..sets.len() {
        for j in (i + 1)..sets.len() {
            value = value.min(set_distance(x, &sets[i], &sets[j]));
        }
    }
    Some((value, sets))
}

/// Two-set refinement: first set is a sublevel prefix, second is the best far set.
fn sublevel_pair(x: &FiniteMMSpace, order: &[usize], k0: f64, k1: f64) -> (f64, Vec<Vec<usize>>) {
    let masses = Masses::of(x);
    let need0 = masses.target(k0, x.grain());
    let need1 = masses.target(k1, x.grain());
    let mut acc = Acc::default();
    let mut a = Vec::new();
    for &i in order {
        if acc.meets(need0) {
            break;
        }
        acc.add(&masses, i);
        a.push(i);
    }
    let n = x.len();
    let dmin: Vec<f64> = (0..n).map(|i| a.iter().map(|&c| x.dist(i, c)).fold(f64::INFINITY, f64::min)).collect();
    let mut scratch = Vec::new();
    let t = upper_quantile(&dmin, &masses, need1, &mut scratch);
    (t, vec![a, far_set(&dmin, t)])
}

fn heuristic(x: &FiniteMMSpace, kappas: &[f64], config: SeparationConfig) -> Separation {
    let n = x.len();
    let mut rng = rng::stream(config.seed, &[tag::SEPARATION]);
    let mut centers: Vec<usize> = if config.sweeps >= n {
        (0..n).collect()
    } else {
        rand::seq::index::sample(&mut rng, n, config.sweeps).into_iter().collect()
    };
    centers.sort_unstable();
    let results: Vec<(f64, Vec<Vec<usize>>)> = centers
        .par_iter()
        .flat_map_iter(|&c| {
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| cmp_f64(&x.dist(a, c), &x.dist(b, c)).then(a.cmp(&b)));
            let mut rev = order.clone();
            rev.reverse();
            let mut out = Vec::new();
            for ord in [&order, &rev] {
                if kappas.len() == 2 {
                    out.push(sublevel_pair(x, ord, kappas[0], kappas[1]));
                    let (v, mut s) = sublevel_pair(x, ord, kappas[1], kappas[0]);
                    s.reverse();
                    out.push((v, s));
                }
                if let Some(r) = sweep(x, ord, kappas) {
                    out.push(r);
                }
            }
            if let Some(r) = farthest_balls(x, c, kappas) {
                out.push(r);
            }
            out
        })
        .collect();
    let mut best = Separation { value: 0.0, witness_sets: vec![Vec::new(); kappas.len()], exact: false };
    for (v, sets) in results {
        if v > best.value {
            best = Separation { value: v, witness_sets: sets, exact: false };
        }
    }
    best
}

/// `Sep(X; κ₀, …, κ_N)`. Exact for two sets within the search budget; otherwise a flagged
/// lower bound.
pub fn separation_with(x: &FiniteMMSpace, kappas: &[f64], config: SeparationConfig) -> Result<Separation> {
    if kappas.len() < 2 {
        return Err(MmError::arg("separation needs at least two masses"));
    }
    if kappas.iter().any(|&k| !(k > 0.0) || k > 1.0) {
        return Err(MmError::arg("separation masses must lie in (0, 1]"));
    }
    let masses = Masses::of(x);
    let feasible = match masses.target(1.0, x.grain()) {
        Need::Units(total) => {
            let needed: u64 = kappas
                .iter()
                .map(|&k| match masses.target(k, x.grain()) {
                    Need::Units(u) => u,
                    Need::Mass(_) => unreachable!("exact masses give unit targets"),
                })
                .sum();
            needed <= total
        }
        Need::Mass(_) => kappas.iter().sum::<f64>() <= 1.0 + MASS_SLACK,
    };
    if !feasible || x.len() < 2 {
        return Ok(Separation { value: 0.0, witness_sets: vec![Vec::new(); kappas.len()], exact: true });
    }
    if kappas.len() == 2 {
        if let Some(s) = separation_two(x, kappas[0], kappas[1], config.node_budget) {
            return Ok(s);
        }
    }
    Ok(heuristic(x, kappas, config))
}

pub fn separation(x: &FiniteMMSpace, kappas: &[f64]) -> Result<Separation> {
    separation_with(x, kappas, SeparationConfig::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> FiniteMMSpace {
        FiniteMMSpace::from_matrix(&[vec![0.0, 1.0], vec![1.0, 0.0]], vec![0.5, 0.5]).unwrap()
    }

    fn line(pos: &[f64]) -> FiniteMMSpace {
        let rows: Vec<Vec<f64>> = pos.iter().map(|a| pos.iter().map(|b| (a - b).abs()).collect()).collect();
        let m = pos.len();
        FiniteMMSpace::from_matrix(&rows, vec![1.0 / m as f64; m]).unwrap()
    }

    #[test]
    fn two_point_examples() {
        let x = two_point();
        let s = separation(&x, &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 1.0);
        assert!(s.exact);
        assert_eq!(separation(&x, &[0.6, 0.6]).unwrap().value, 0.0);
    }

    #[test]
    fn middle_set_against_both_ends() {
        // A0 in the middle, A1 split across both ends
        let x = line(&[-10.0, 0.0, 0.0, 10.0]);
        let s = separation(&x, &[0.5, 0.5]).unwrap();
        assert_eq!(s.value, 10.0);
    }

    #[test]
    fn component_grouping_is_not_enough() {
        // thirds at 0, 1, 2: the two outer points are 2 apart
        let x = line(&[0.0, 1.0, 2.0]);
        let s = separation(&x, &[1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(s.value, 2.0);
        assert_eq!(s.witness_sets, vec![vec![0], vec![2]]);
    }

    #[test]
    fn heuristic_is_a_lower_bound_and_flagged() {
        let x = line(&[0.0, 1.0, 2.0, 5.0, 9.0]);
        let s = separation(&x, &[0.2, 0.2, 0.2]).unwrap();
        assert!(!s.exact);
        assert!(s.value <= 4.0 && s.value >= 3.0, "{}", s.value);
    }

    #[test]
    fn budget_fallback_is_flagged() {
        let x = line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        let cfg = SeparationConfig { node_budget: 1, ..Default::default() };
        let s = separation_with(&x, &[0.5, 0.5], cfg).unwrap();
        assert!(!s.exact);
        let e = separation(&x, &[0.5, 0.5]).unwrap();
        assert!(e.exact && s.value <= e.value);
        assert_eq!(e.value, 1.0);
    }
}
