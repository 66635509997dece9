use crate::error::{MmError, Result};
use crate::invariants::{partial_diameter, ScalarPushforward};

use super::{bisect_float, scan_levels};

/// `me(f, g)`: the least `ε ≥ 0` with `μ{|f − g| > ε} ≤ ε`. With `optimize_shift`, the
/// infimum over constant shifts `me(f + t, g)`, i.e. the distance between classes modulo
/// constants.
pub fn me_distance(f: &[f64], g: &[f64], weights: &[f64], grain: Option<u64>, optimize_shift: bool) -> Result<f64> {
    if f.len() != g.len() || f.len() != weights.len() {
        return Err(MmError::arg("me_distance needs value vectors and weights of equal length"));
    }
    if optimize_shift {
        let h: Vec<f64> = g.iter().zip(f).map(|(a, b)| a - b).collect();
        let p = ScalarPushforward::new(h, weights.to_vec(), grain)?;
        Ok(me_shifted(&p))
    } else {
        let e: Vec<f64> = f.iter().zip(g).map(|(a, b)| (a - b).abs()).collect();
        let p = ScalarPushforward::new(e, weights.to_vec(), grain)?;
        Ok(me_of_gaps(&p))
    }
}

/// `me` from the law of `|f − g|`.
pub fn me_of_gaps(gaps: &ScalarPushforward) -> f64 {
    let values = gaps.values();
    let mut levels = Vec::with_capacity(values.len() + 1);
    if values.first().is_none_or(|v| *v > 0.0) {
        levels.push(0.0);
    }
    levels.extend_from_slice(values);
    // tail mass strictly above each level
    let offset = levels.len() - values.len();
    let tails: Vec<f64> = match gaps.counts() {
        Some((c, g)) => {
            let mut above = c.iter().sum::<u64>();
            let mut out = Vec::with_capacity(levels.len());
            if offset == 1 {
                out.push(above as f64 / g as f64);
            }
            for &k in c {
                above -= k;
                out.push(above as f64 / g as f64);
            }
            out
        }
        None => {
            let w = gaps.weights();
            let mut out = vec![0.0; levels.len()];
            let mut acc = 0.0;
            for k in (0..values.len()).rev() {
                out[k + offset] = acc;
                acc += w[k];
            }
            if offset == 1 {
                out[0] = acc.min(1.0);
            }
            out
        }
    };
    scan_levels(&levels, |j| tails[j])
}

/// `inf_t me(f + t, g)` from the law of `g − f`: the least `ε` with `diam(·; 1 − ε) ≤ 2ε`.
pub fn me_shifted(diff: &ScalarPushforward) -> f64 {
    bisect_float(|eps| partial_diameter(diff, 1.0 - eps) <= 2.0 * eps)
}
