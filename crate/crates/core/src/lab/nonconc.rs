use rayon::prelude::*;
use serde::Serialize;

use super::mb::cell_seed;
use crate::distances::me_distance;
use crate::error::{MmError, Result};
use crate::models::{sample_gaussian, GaussianSpec};
use crate::special::{bisect_increasing, erfc};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NonconcRow {
    pub n: usize,
    pub value: f64,
}

/// `me` distance modulo constants between coordinates `i` and `j` of an `m`-point sample
/// of `γ^n`.
pub fn coordinate_pair_distance(n: usize, i: usize, j: usize, m: usize, seed: u64) -> Result<f64> {
    if i >= n || j >= n {
        return Err(MmError::arg("coordinate index out of range"));
    }
    let x = sample_gaussian(GaussianSpec { n, lambda: 1.0, m, seed: cell_seed(seed, 5, n) })?;
    let (cloud, s) = x.embedding().ok_or(MmError::MissingEmbedding)?;
    let f: Vec<f64> = (0..m).map(|p| s * cloud.point(p)[i]).collect();
    let g: Vec<f64> = (0..m).map(|p| s * cloud.point(p)[j]).collect();
    me_distance(&f, &g, x.weights(), x.grain(), true)
}

/// The coordinate-pair distance of the first two coordinates across dimensions.
pub fn nonconcentration_constant(n_grid: &[usize], m: usize, seed: u64) -> Result<Vec<NonconcRow>> {
    if n_grid.iter().any(|&n| n < 2) {
        return Err(MmError::arg("the coordinate pair needs n ≥ 2"));
    }
    n_grid.par_iter().map(|&n| Ok(NonconcRow { n, value: coordinate_pair_distance(n, 0, 1, m, seed)? })).collect()
}

/// Limit value: the root of `2(1 − Φ(ε/√2)) = ε`.
pub fn nonconcentration_limit() -> f64 {
    // 2(1 − Φ(ε/√2)) = erfc(ε/2); ε − erfc(ε/2) is increasing
    bisect_increasing(|e| e - erfc(e / 2.0), 0.0, 0.0, 2.0)
}
