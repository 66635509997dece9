use serde::Serialize;

use crate::error::{MmError, Result};
use crate::numeric::{cmp_f64, compensated_sum, MASS_SLACK};

/// A probability measure on the real line with finitely many atoms, sorted ascending.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalarPushforward {
    values: Vec<f64>,
    weights: Vec<f64>,
    /// Atom masses as integer multiples of `1 / grain`, when exact.
    #[serde(skip)]
    counts: Option<(Vec<u64>, u64)>,
}

impl ScalarPushforward {
    /// Sort and merge equal values. `grain` marks weights that are exact multiples of `1 / grain`.
    pub fn new(values: Vec<f64>, weights: Vec<f64>, grain: Option<u64>) -> Result<Self> {
        if values.len() != weights.len() {
            return Err(MmError::arg("values and weights differ in length"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(MmError::arg("non-finite value in scalar pushforward"));
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return Err(MmError::arg("negative weight in scalar pushforward"));
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(MmError::arg(format!("scalar pushforward has mass {total}")));
        }
        let mut order: Vec<usize> = (0..values.len()).filter(|&i| weights[i] > 0.0).collect();
        order.sort_by(|&a, &b| cmp_f64(&values[a], &values[b]).then(a.cmp(&b)));
        let mut vs: Vec<f64> = Vec::with_capacity(order.len());
        let mut groups: Vec<Vec<f64>> = Vec::with_capacity(order.len());
        for &i in &order {
            if vs.last() == Some(&values[i]) {
                groups.last_mut().expect("group open").push(weights[i]);
            } else {
                vs.push(values[i]);
                groups.push(vec![weights[i]]);
            }
        }
        let (ws, counts) = match grain {
            Some(g) if g > 0 => {
                let cs: Vec<u64> =
                    groups.iter().map(|ws| ws.iter().map(|w| (w * g as f64).round() as u64).sum()).collect();
                let ws = cs.iter().map(|&c| c as f64 / g as f64).collect();
                (ws, Some((cs, g)))
            }
            _ => (groups.into_iter().map(compensated_sum).collect(), None),
        };
        Ok(ScalarPushforward { values: vs, weights: ws, counts })
    }

    /// Uniform weights `1/m`.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let m = values.len();
        if m == 0 {
            return Err(MmError::arg("empty sample"));
        }
        Self::new(values, vec![1.0 / m as f64; m], Some(m as u64))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn grain(&self) -> Option<u64> {
        self.counts.as_ref().map(|c| c.1)
    }

    pub(crate) fn counts(&self) -> Option<(&[u64], u64)> {
        self.counts.as_ref().map(|(c, g)| (c.as_slice(), *g))
    }

    /// `μ(−∞, x]`.
    pub fn cdf(&self, x: f64) -> f64 {
        let k = self.values.partition_point(|v| *v <= x);
        match self.counts() {
            Some((c, g)) => c[..k].iter().sum::<u64>() as f64 / g as f64,
            None => compensated_sum(self.weights[..k].iter().copied()),
        }
    }
}

/// Prefix masses: either exact counts or float partial sums.
pub(crate) enum Prefix {
    Counts { prefix: Vec<u64>, grain: u64 },
    Float(Vec<f64>),
}

impl Prefix {
    pub(crate) fn of(p: &ScalarPushforward) -> Self {
        match p.counts() {
            Some((c, g)) => {
                let mut prefix = Vec::with_capacity(c.len() + 1);
                let mut acc = 0u64;
                prefix.push(0);
                for &x in c {
                    acc += x;
                    prefix.push(acc);
                }
                Prefix::Counts { prefix, grain: g }
            }
            None => {
                let mut prefix = Vec::with_capacity(p.len() + 1);
                let (mut s, mut comp) = (0.0f64, 0.0f64);
                prefix.push(0.0);
                for &w in p.weights() {
                    let t = s + w;
                    comp += if s.abs() >= w.abs() { (s - t) + w } else { (w - t) + s };
                    s = t;
                    prefix.push(s + comp);
                }
                Prefix::Float(prefix)
            }
        }
    }

    /// Does the atom range `[i, j)` carry mass at least `alpha`?
    pub(crate) fn reaches(&self, i: usize, j: usize, target: &Target) -> bool {
        match (self, target) {
            (Prefix::Counts { prefix, .. }, Target::Count(t)) => prefix[j] - prefix[i] >= *t,
            (Prefix::Float(prefix), Target::Mass(a)) => prefix[j] - prefix[i] >= a - MASS_SLACK,
            _ => unreachable!("target built for a different prefix kind"),
        }
    }

    pub(crate) fn target(&self, alpha: f64) -> Target {
        match self {
            Prefix::Counts { grain, .. } => {
                let t = (alpha * *grain as f64 - 1e-9).ceil();
                Target::Count(if t <= 0.0 { 0 } else { t as u64 })
            }
            Prefix::Float(_) => Target::Mass(alpha),
        }
    }
}

pub(crate) enum Target {
    Count(u64),
    Mass(f64),
}

/// Shortest window `[values[i], values[j]]` carrying mass `≥ alpha`, as atom indices.
/// Ties go to the smallest left endpoint. `None` when no window qualifies.
pub fn partial_window(p: &ScalarPushforward, alpha: f64) -> Option<(usize, usize)> {
    if alpha > 1.0 || p.is_empty() {
        return None;
    }
    let prefix = Prefix::of(p);
    let target = prefix.target(alpha);
    let v = p.values();
    let n = v.len();
    let mut best: Option<(usize, usize)> = None;
    let mut best_len = f64::INFINITY;
    let mut j = 0usize;
    for i in 0..n {
        if j < i + 1 {
            j = i + 1;
        }
        while j < n && !prefix.reaches(i, j, &target) {
            j += 1;
        }
        if !prefix.reaches(i, j, &target) {
            break;
        }
        let len = v[j - 1] - v[i];
        if len < best_len {
            best_len = len;
            best = Some((i, j - 1));
        }
    }
    best
}

/// `diam(p; alpha)`: the least diameter of a set of mass `≥ alpha`. Zero for `alpha ≤ 0`
/// and, by convention, for `alpha > 1`.
pub fn partial_diameter(p: &ScalarPushforward, alpha: f64) -> f64 {
    if alpha <= 0.0 {
        return 0.0;
    }
    match partial_window(p, alpha) {
        Some((i, j)) => p.values()[j] - p.values()[i],
        None => 0.0,
    }
}

/// Best separation of two sets of masses `κ₀`, `κ₁` that lie on opposite sides of a cut:
/// an initial segment against a final segment, in either order. A lower bound for the
/// separation of `p`, exact when an optimal pair is not interleaved.
pub fn ordered_separation(p: &ScalarPushforward, kappa0: f64, kappa1: f64) -> f64 {
    let prefix = Prefix::of(p);
    let n = p.len();
    let v = p.values();
    let one_side = |left: f64, right: f64| {
        let (tl, tr) = (prefix.target(left), prefix.target(right));
        // last atom of the shortest initial segment, first atom of the shortest final segment
        let i = (1..=n).find(|&j| prefix.reaches(0, j, &tl)).map(|j| j - 1);
        let j = (0..n).rev().find(|&i| prefix.reaches(i, n, &tr));
        match (i, j) {
            (Some(i), Some(j)) if j > i => v[j] - v[i],
            _ => 0.0,
        }
    };
    one_side(kappa0, kappa1).max(one_side(kappa1, kappa0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thirds() {
        let p = ScalarPushforward::uniform(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(partial_diameter(&p, 0.0), 0.0);
        assert_eq!(partial_diameter(&p, 1.0 / 3.0), 0.0);
        assert_eq!(partial_diameter(&p, 2.0 / 3.0), 1.0);
        assert_eq!(partial_diameter(&p, 1.0), 2.0);
        assert_eq!(partial_diameter(&p, 1.5), 0.0);
        assert_eq!(partial_window(&p, 2.0 / 3.0), Some((0, 1)));
    }

    #[test]
    fn ordered_separation_cases() {
        let p = ScalarPushforward::uniform(vec![0.0, 4.0, 6.0, 10.0]).unwrap();
        assert_eq!(ordered_separation(&p, 0.25, 0.25), 10.0);
        assert_eq!(ordered_separation(&p, 0.5, 0.5), 2.0);
        // {0, 10} against {4, 6} is 4: interleaved sets are out of reach
        assert_eq!(ordered_separation(&p, 0.75, 0.5), 0.0);
        let q = ScalarPushforward::new(vec![0.0, 1.0, 3.0], vec![0.6, 0.1, 0.3], None).unwrap();
        assert_eq!(ordered_separation(&q, 0.3, 0.6), 3.0);
        assert_eq!(ordered_separation(&q, 0.65, 0.3), 2.0);
    }

    #[test]
    fn float_weights() {
        let p = ScalarPushforward::new(vec![0.0, 5.0, 5.5, 9.0], vec![0.4, 0.3, 0.2, 0.1], None).unwrap();
        assert_eq!(partial_diameter(&p, 0.5), 0.5);
        assert_eq!(partial_diameter(&p, 0.9), 5.5);
        assert_eq!(partial_diameter(&p, 0.4), 0.0);
    }

    #[test]
    fn merges_duplicates() {
        let p = ScalarPushforward::uniform(vec![1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(p.values(), &[0.0, 1.0]);
        assert_eq!(p.weights(), &[0.25, 0.75]);
        assert_eq!(partial_diameter(&p, 0.75), 0.0);
        assert_eq!(p.cdf(0.5), 0.25);
    }
}
