use serde::Serialize;

use crate::error::Result;
use crate::invariants::{obs_diameter, CandidateFamily, FamilyConfig, Provenance};
use crate::models::{gaussian_obs_diameter, rayleigh_min_window, sample_cpn, ProjectiveMetric, ProjectiveSpec};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CpnBounds {
    pub n: usize,
    pub r: f64,
    pub kappa: f64,
    /// `r / √(2n + 1)`.
    pub lambda: f64,
    pub estimate: f64,
    pub witness: Provenance,
    /// `λ · diam(Rayleigh; 1 − κ)`.
    pub lower_ref: f64,
    /// `2λ I⁻¹((1 − κ)/2)`.
    pub upper_ref: f64,
    /// Where the estimate sits in the bracket: 0 at `lower_ref`, 1 at `upper_ref`.
    pub position: f64,
    pub within: bool,
}

/// Observable-diameter estimate of a `CP^n(r)` sample against the limit bracket. The family
/// holds distance functions and phase-invariant moduli of complex projections.
pub fn cpn_obsdiam_bounds(
    n: usize,
    r: f64,
    kappa: f64,
    m: usize,
    seed: u64,
    metric: ProjectiveMetric,
    tol: f64,
) -> Result<CpnBounds> {
    let x = sample_cpn(ProjectiveSpec { n, r, metric, m, seed })?;
    let family = CandidateFamily::default_for(&x, FamilyConfig { seed, ..FamilyConfig::default() });
    let est = obs_diameter(&x, kappa, &family)?;
    let lambda = r / ((2 * n + 1) as f64).sqrt();
    let (a, b) = rayleigh_min_window(1.0 - kappa)?;
    let lower_ref = lambda * (b - a);
    let upper_ref = gaussian_obs_diameter(lambda, kappa)?;
    Ok(CpnBounds {
        n,
        r,
        kappa,
        lambda,
        estimate: est.value,
        witness: est.provenance,
        lower_ref,
        upper_ref,
        position: (est.value - lower_ref) / (upper_ref - lower_ref),
        within: lower_ref - tol <= est.value && est.value <= upper_ref + tol,
    })
}
