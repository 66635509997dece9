use serde::Serialize;

use crate::error::Result;
use crate::invariants::separation;
use crate::models::{sample_sphere, SphereMetric, SphereSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingCheck {
    /// Separation of the `S^n(√n)` sample.
    pub base: f64,
    /// Separation of the same sample rescaled to radius `r`.
    pub scaled: f64,
    /// `r / √n`.
    pub factor: f64,
    pub relative_error: f64,
    pub exact: bool,
}

/// `Sep` of an `S^n(r)` sample against `(r/√n)·Sep` of the same points on `S^n(√n)`.
pub fn dissipation_scaling(n: usize, r: f64, m: usize, kappas: &[f64], seed: u64) -> Result<ScalingCheck> {
    let base_space = sample_sphere(SphereSpec { n, r: (n as f64).sqrt(), metric: SphereMetric::Geodesic, m, seed })?;
    let factor = r / (n as f64).sqrt();
    let base = separation(&base_space, kappas)?;
    let scaled = separation(&base_space.scaled(factor)?, kappas)?;
    let expected = factor * base.value;
    let relative_error = if expected == 0.0 { scaled.value.abs() } else { (scaled.value - expected).abs() / expected };
    Ok(ScalingCheck {
        base: base.value,
        scaled: scaled.value,
        factor,
        relative_error,
        exact: base.exact && scaled.exact,
    })
}
