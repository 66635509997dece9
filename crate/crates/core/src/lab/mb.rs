use rayon::prelude::*;
use serde::Serialize;

use crate::distances::{prokhorov, prokhorov_rn, MeasureOnCommonSpace};
use crate::error::{MmError, Result};
use crate::measurements::MeasureOnRN;
use crate::mm::{EmbeddedMetric, FiniteMMSpace, Metric, PointCloud};
use crate::models::{
    project, sample_cpn_lift, sample_gaussian, sample_sphere, GaussianSpec, Projection, ProjectiveMetric,
    ProjectiveSpec, SphereMetric, SphereSpec,
};
use crate::rng::{derive, tag};

const CERTIFY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MbRow {
    pub n: usize,
    pub d_p: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MbQuotientRow {
    pub n: usize,
    /// `d_P` on `C^k = R^{2k}` with the Euclidean metric.
    pub sphere: f64,
    /// `d_P` on `C^k/S¹` for the same two samples.
    pub quotient: f64,
}

/// The empirical measure of an embedded sample, as a measure on `(R^dim, ℓ∞)`.
pub(crate) fn cloud_measure(x: &FiniteMMSpace) -> Result<MeasureOnRN> {
    let (cloud, s) = x.embedding().ok_or(MmError::MissingEmbedding)?;
    let coords = cloud.coords().iter().map(|a| a * s).collect();
    MeasureOnRN::from_weighted(cloud.dim(), coords, x.weights().to_vec(), x.grain())
}

/// Sample seed for grid point `n`; independent of the radius so that rescaled laws reuse it.
pub(crate) fn cell_seed(seed: u64, kind: u64, n: usize) -> u64 {
    derive(seed, &[tag::LAB, kind, n as u64])
}

/// `d_P((π^{n+1}_k)_* σ^n, γ^k_{λ²})` between an `m`-point sample of `S^n(λ√n)` projected to
/// `R^k` and one fixed `m`-point reference sample of `γ^k_{λ²}`, for each `n` of the grid.
pub fn mb_convergence(n_grid: &[usize], k: usize, lambda: f64, m: usize, seed: u64) -> Result<Vec<MbRow>> {
    if k == 0 || n_grid.iter().any(|&n| n + 1 < k) {
        return Err(MmError::arg("projection dimension must satisfy 1 ≤ k ≤ n + 1"));
    }
    let reference = sample_gaussian(GaussianSpec { n: k, lambda, m, seed: cell_seed(seed, 1, 0) })?;
    let reference = cloud_measure(&reference)?;
    n_grid
        .par_iter()
        .map(|&n| {
            let r = lambda * (n as f64).sqrt();
            let x = sample_sphere(SphereSpec { n, r, metric: SphereMetric::Chordal, m, seed: cell_seed(seed, 2, n) })?;
            let image = project(&x, Projection::Coordinate(k), CERTIFY_TOL)?;
            Ok(MbRow { n, d_p: prokhorov_rn(&cloud_measure(&image.space)?, &reference)? })
        })
        .collect()
}

/// Both measures as weights on the union of their supports, under `kind`.
fn on_union(a: &FiniteMMSpace, b: &FiniteMMSpace, kind: EmbeddedMetric) -> Result<FiniteMMSpace> {
    let (ca, sa) = a.embedding().ok_or(MmError::MissingEmbedding)?;
    let (cb, sb) = b.embedding().ok_or(MmError::MissingEmbedding)?;
    let mut coords: Vec<f64> = ca.coords().iter().map(|v| v * sa).collect();
    coords.extend(cb.coords().iter().map(|v| v * sb));
    let (na, nb) = (a.len(), b.len());
    let weights = vec![1.0 / (na + nb) as f64; na + nb];
    FiniteMMSpace::new(
        crate::mm::default_labels(na + nb),
        Metric::Embedded(PointCloud::new(ca.dim(), coords, kind)?),
        weights,
    )
}

fn split_prokhorov(ground: &FiniteMMSpace, na: usize, nb: usize) -> Result<f64> {
    let mut wa = vec![1.0 / na as f64; na];
    wa.extend(std::iter::repeat_n(0.0, nb));
    let mut wb = vec![0.0; na];
    wb.extend(std::iter::repeat_n(1.0 / nb as f64, nb));
    let mu = MeasureOnCommonSpace::with_grain(ground, wa, Some(na as u64))?;
    let nu = MeasureOnCommonSpace::with_grain(ground, wb, Some(nb as u64))?;
    prokhorov(&mu, &nu)
}

/// The projective variant: `S^{2n+1}(λ√(2n+1))` samples projected to `C^k`, compared with a
/// `γ^{2k}_{λ²}` reference before and after the quotient by the phase action. The quotient
/// value never exceeds the other.
pub fn mb_convergence_quotient(
    n_grid: &[usize],
    k: usize,
    lambda: f64,
    m: usize,
    seed: u64,
) -> Result<Vec<MbQuotientRow>> {
    if k == 0 || n_grid.iter().any(|&n| n + 1 < k) {
        return Err(MmError::arg("projection dimension must satisfy 1 ≤ k ≤ n + 1"));
    }
    let reference = sample_gaussian(GaussianSpec { n: 2 * k, lambda, m, seed: cell_seed(seed, 3, 0) })?;
    n_grid
        .par_iter()
        .map(|&n| {
            let r = lambda * ((2 * n + 1) as f64).sqrt();
            let spec =
                ProjectiveSpec { n, r, metric: ProjectiveMetric::ChordalQuotient, m, seed: cell_seed(seed, 4, n) };
            let lift = sample_cpn_lift(spec)?;
            let image = project(&lift, Projection::Coordinate(2 * k), CERTIFY_TOL)?;
            let flat = on_union(&image.space, &reference, EmbeddedMetric::Euclidean)?;
            let quotient = on_union(&image.space, &reference, EmbeddedMetric::PhaseQuotient)?;
            Ok(MbQuotientRow { n, sphere: split_prokhorov(&flat, m, m)?, quotient: split_prokhorov(&quotient, m, m)? })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mb_rows_are_small_and_ordered_by_grid() {
        let rows = mb_convergence(&[10, 40], 1, 1.0, 2000, 3).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![10, 40]);
        assert!(rows.iter().all(|r| r.d_p > 0.0 && r.d_p < 0.12), "{rows:?}");
        assert!(mb_convergence(&[3], 5, 1.0, 10, 0).is_err());
    }

    #[test]
    fn quotient_contracts() {
        for row in mb_convergence_quotient(&[5, 20], 1, 1.0, 300, 9).unwrap() {
            assert!(row.quotient <= row.sphere, "{row:?}");
        }
    }
}
