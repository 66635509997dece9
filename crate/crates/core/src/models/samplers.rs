use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MmError, Result};
use crate::mm::{EmbeddedMetric, FiniteMMSpace, PointCloud};
use crate::rng::{self, tag};

/// Points per independently seeded block.
const BLOCK: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereMetric {
    Geodesic,
    Chordal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectiveMetric {
    FubiniStudy,
    ChordalQuotient,
}

/// `m` uniform points on `S^n(r) ⊂ R^{n+1}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SphereSpec {
    pub n: usize,
    pub r: f64,
    pub metric: SphereMetric,
    pub m: usize,
    pub seed: u64,
}

/// `m` draws from `γ^n_{λ²}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianSpec {
    pub n: usize,
    pub lambda: f64,
    pub m: usize,
    pub seed: u64,
}

/// `m` points of `CP^n(r) = S^{2n+1}(r)/S¹`, `n` the complex dimension.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProjectiveSpec {
    pub n: usize,
    pub r: f64,
    pub metric: ProjectiveMetric,
    pub m: usize,
    pub seed: u64,
}

/// `m` vectors of `dim` standard normals, each `BLOCK` of them drawn from its own stream.
/// With `unit`, each vector is normalized.
fn normal_rows(dim: usize, m: usize, unit: bool, seed: u64, domain: u64) -> Vec<f64> {
    let blocks = m.div_ceil(BLOCK);
    let parts: Vec<Vec<f64>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, &[domain, dim as u64, b as u64]);
            let rows = BLOCK.min(m - b * BLOCK);
            let mut out = Vec::with_capacity(rows * dim);
            for _ in 0..rows {
                loop {
                    let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
                    if !unit {
                        out.extend(g);
                        break;
                    }
                    let norm = g.iter().map(|a| a * a).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        out.extend(g.into_iter().map(|a| a / norm));
                        break;
                    }
                }
            }
            out
        })
        .collect();
    parts.concat()
}

fn check(m: usize, size: f64, what: &str) -> Result<()> {
    if m == 0 || !(size > 0.0) || !size.is_finite() {
        return Err(MmError::arg(format!("{what} needs m ≥ 1 and a positive finite size")));
    }
    Ok(())
}

/// Uniform sample of `S^n(r)`: normalized Gaussian vectors on the unit sphere, scaled by `r`.
pub fn sample_sphere(spec: SphereSpec) -> Result<FiniteMMSpace> {
    check(spec.m, spec.r, "sphere sample")?;
    let coords = normal_rows(spec.n + 1, spec.m, true, spec.seed, tag::SPHERE);
    let kind = match spec.metric {
        SphereMetric::Geodesic => EmbeddedMetric::SphereGeodesic { radius: 1.0 },
        SphereMetric::Chordal => EmbeddedMetric::Euclidean,
    };
    FiniteMMSpace::uniform_cloud(PointCloud::new(spec.n + 1, coords, kind)?)?.scaled(spec.r)
}

/// Sample of `Γ^n_{λ²}`: standard Gaussian draws scaled by `λ`, so equal seeds give samples
/// that differ exactly by the scale factor.
pub fn sample_gaussian(spec: GaussianSpec) -> Result<FiniteMMSpace> {
    check(spec.m, spec.lambda, "Gaussian sample")?;
    if spec.n == 0 {
        return Err(MmError::arg("Gaussian space needs n ≥ 1"));
    }
    let coords = normal_rows(spec.n, spec.m, false, spec.seed, tag::GAUSSIAN);
    FiniteMMSpace::uniform_cloud(PointCloud::new(spec.n, coords, EmbeddedMetric::Euclidean)?)?.scaled(spec.lambda)
}

/// Sample of `CP^n(r)`: uniform points of `S^{2n+1}` in interleaved complex coordinates,
/// with the phase-minimized distance in closed form.
pub fn sample_cpn(spec: ProjectiveSpec) -> Result<FiniteMMSpace> {
    check(spec.m, spec.r, "projective sample")?;
    let dim = 2 * spec.n + 2;
    let coords = normal_rows(dim, spec.m, true, spec.seed, tag::CPN);
    let kind = match spec.metric {
        ProjectiveMetric::FubiniStudy => EmbeddedMetric::FubiniStudy { radius: 1.0 },
        ProjectiveMetric::ChordalQuotient => EmbeddedMetric::PhaseQuotient,
    };
    FiniteMMSpace::uniform_cloud(PointCloud::new(dim, coords, kind)?)?.scaled(spec.r)
}

/// The same sample points as [`sample_cpn`] before the quotient: `S^{2n+1}(r)` with the
/// chordal metric.
pub fn sample_cpn_lift(spec: ProjectiveSpec) -> Result<FiniteMMSpace> {
    check(spec.m, spec.r, "projective sample")?;
    let dim = 2 * spec.n + 2;
    let coords = normal_rows(dim, spec.m, true, spec.seed, tag::CPN);
    FiniteMMSpace::uniform_cloud(PointCloud::new(dim, coords, EmbeddedMetric::Euclidean)?)?.scaled(spec.r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm(x: &FiniteMMSpace, i: usize) -> f64 {
        let (c, s) = x.embedding().unwrap();
        s * c.point(i).iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    #[test]
    fn sphere_points_have_radius_r() {
        let x = sample_sphere(SphereSpec { n: 5, r: 2.5, metric: SphereMetric::Geodesic, m: 700, seed: 1 }).unwrap();
        assert_eq!(x.len(), 700);
        for i in 0..x.len() {
            assert!((norm(&x, i) - 2.5).abs() < 1e-12);
        }
    }

    #[test]
    fn coordinate_second_moment() {
        // Σ x_i² = r², so each coordinate has mean square r²/(n + 1)
        let (n, r, m) = (9, 3.0, 20_000);
        let x = sample_sphere(SphereSpec { n, r, metric: SphereMetric::Chordal, m, seed: 4 }).unwrap();
        let (c, s) = x.embedding().unwrap();
        let sq: Vec<f64> = (0..m).map(|i| (s * c.point(i)[0]).powi(2)).collect();
        let mean = sq.iter().sum::<f64>() / m as f64;
        let var = sq.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        let se = (var / m as f64).sqrt();
        assert!((mean - r * r / (n + 1) as f64).abs() < 3.0 * se, "{mean}");
    }

    #[test]
    fn gaussian_scale_is_exact() {
        let a = sample_gaussian(GaussianSpec { n: 3, lambda: 1.0, m: 50, seed: 8 }).unwrap();
        let b = sample_gaussian(GaussianSpec { n: 3, lambda: 2.0, m: 50, seed: 8 }).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                assert_eq!(b.dist(i, j), 2.0 * a.dist(i, j));
            }
        }
    }

    #[test]
    fn gaussian_coordinate_variance() {
        let (lambda, m) = (1.5, 40_000);
        let x = sample_gaussian(GaussianSpec { n: 2, lambda, m, seed: 2 }).unwrap();
        let (c, s) = x.embedding().unwrap();
        let v: Vec<f64> = (0..m).map(|i| s * c.point(i)[1]).collect();
        let mean = v.iter().sum::<f64>() / m as f64;
        let var = v.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (m - 1) as f64;
        // the sample variance has standard error ≈ λ²·√(2/m)
        assert!((var - lambda * lambda).abs() < 3.0 * lambda * lambda * (2.0 / m as f64).sqrt(), "{var}");
    }

    #[test]
    fn projective_distances() {
        let spec = ProjectiveSpec { n: 3, r: 2.0, metric: ProjectiveMetric::FubiniStudy, m: 200, seed: 3 };
        let fs = sample_cpn(spec).unwrap();
        let ch = sample_cpn(ProjectiveSpec { metric: ProjectiveMetric::ChordalQuotient, ..spec }).unwrap();
        let lift = sample_cpn_lift(spec).unwrap();
        for i in 0..50 {
            for j in 0..50 {
                let d = fs.dist(i, j);
                assert!((0.0..=std::f64::consts::PI + 1e-12).contains(&d));
                assert!(ch.dist(i, j) <= lift.dist(i, j) + 1e-12);
            }
        }
    }
}
