use rayon::prelude::*;
use serde::Serialize;

use super::set::{measurement_set, MeasurementSet, PyramidApprox};
use crate::distances::hausdorff_measures;
use crate::error::{MmError, Result};

#[derive(Clone, Copy, Debug)]
pub struct RhoConfig {
    /// Truncation level `K`.
    pub k_max: usize,
    /// Measurements per space and level.
    pub budget: usize,
    pub seed: u64,
}

impl Default for RhoConfig {
    fn default() -> Self {
        RhoConfig { k_max: 6, budget: 8, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoTerm {
    pub k: usize,
    /// Hausdorff distance between the level-`k` measurement sets.
    pub hausdorff: f64,
    /// `2^{-k} · min(1, 2ĥ_k) / 4k`.
    pub term: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoReport {
    pub value: f64,
    /// `Σ_{k > K} 2^{-k} / 4k`, the most the omitted levels can add.
    pub tail_bound: f64,
    pub per_k: Vec<RhoTerm>,
}

/// `Σ_{k > K} 2^{-k}/(4k) = (ln 2 − Σ_{k ≤ K} 2^{-k}/k) / 4`.
pub fn rho_tail(k_max: usize) -> f64 {
    let head: f64 = (1..=k_max).map(|k| 0.5f64.powi(k as i32) / k as f64).sum();
    ((std::f64::consts::LN_2 - head) / 4.0).max(0.0)
}

/// Truncated estimate of the pyramid metric from measurement sets at levels `k = 1..K`
/// with `N = R = k`. The Hausdorff distance of measurement sets bounds the level-`k` term
/// after doubling; each term is capped at its a priori maximum `1/4k`.
pub fn pyramid_rho(px: &PyramidApprox, py: &PyramidApprox, config: RhoConfig) -> Result<RhoReport> {
    pyramid_rho_with(px, py, config, &|p, k| measurement_set(p, k, k as f64, config.budget, config.seed))
}

/// As [`pyramid_rho`], with a caller-supplied source of measurement sets (e.g. a cache).
pub fn pyramid_rho_with(
    px: &PyramidApprox,
    py: &PyramidApprox,
    config: RhoConfig,
    sets: &(dyn Fn(&PyramidApprox, usize) -> Result<MeasurementSet> + Sync),
) -> Result<RhoReport> {
    if config.k_max == 0 {
        return Err(MmError::arg("truncation level must be at least 1"));
    }
    let per_k: Vec<RhoTerm> = (1..=config.k_max)
        .into_par_iter()
        .map(|k| {
            let a = sets(px, k)?;
            let b = sets(py, k)?;
            let hausdorff = hausdorff_measures(&a.members, &b.members)?;
            let term = 0.5f64.powi(k as i32) * (2.0 * hausdorff).min(1.0) / (4.0 * k as f64);
            Ok(RhoTerm { k, hausdorff, term })
        })
        .collect::<Result<_>>()?;
    let value = per_k.iter().map(|t| t.term).sum();
    Ok(RhoReport { value, tail_bound: rho_tail(config.k_max), per_k })
}
