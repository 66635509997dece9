//! The me-metric, Prokhorov distance, Hausdorff distance between sets of measures, and the
//! box distance.

mod boxd;
mod hausdorff;
mod me;
mod prokhorov;

pub use boxd::{box_exact_tiny, box_upper, BoxConfig, BoxUpper, BOX_TINY_LIMIT};
pub use hausdorff::hausdorff_measures;
pub use me::{me_distance, me_of_gaps, me_shifted};
pub use prokhorov::{
    prokhorov, prokhorov_line, prokhorov_line_at_most, prokhorov_rn, prokhorov_rn_at_most, prokhorov_rn_lower_bound,
    MeasureOnCommonSpace, DENSE_PAIR_LIMIT,
};

/// Given ascending `levels` (starting at 0) and a nonincreasing step function taking value
/// `shortfall(j)` on `[levels[j], levels[j + 1])`, return `inf{ε : shortfall(ε) ≤ ε}`.
pub(crate) fn scan_levels(levels: &[f64], shortfall: impl Fn(usize) -> f64) -> f64 {
    let n = levels.len();
    let mut memo: Vec<Option<f64>> = vec![None; n];
    let mut f = |j: usize| *memo[j].get_or_insert_with(|| shortfall(j));
    let next = |j: usize| {
        if j + 1 < n {
            levels[j + 1]
        } else {
            f64::INFINITY
        }
    };
    // first j whose interval contains a feasible ε; the predicate is monotone in j
    let mut lo = 0usize;
    let mut hi = 0usize;
    let mut step = 1usize;
    while !(f(hi) < next(hi)) {
        lo = hi + 1;
        hi = (hi + step).min(n - 1);
        step *= 2;
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if f(mid) < next(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[hi].max(f(hi))
}

/// Smallest float `ε ∈ [0, 1]` satisfying a monotone predicate that holds at 1.
pub(crate) fn bisect_float(pred: impl Fn(f64) -> bool) -> f64 {
    if pred(0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (0u64, 1.0f64.to_bits());
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(f64::from_bits(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    f64::from_bits(hi)
}
