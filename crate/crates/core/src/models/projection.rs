use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{MmError, Result};
use crate::mm::{
    certify_lipschitz_order, EmbeddedMetric, FiniteMMSpace, Metric, OrderCertificate, PointCloud, PointMap,
};
use crate::rng::{self, tag};

/// Coordinate projections `π^n_k` and their Hopf-quotient versions `π̄^{2n}_{2k}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "k")]
pub enum Projection {
    /// First `k` real coordinates, Euclidean (or ℓ∞ for ℓ∞ sources) on the image.
    Coordinate(usize),
    /// First `k` complex coordinates, modulo the phase action.
    HopfCoordinate(usize),
}

#[derive(Clone, Debug)]
pub struct Projected {
    /// The image, carrying the pushed-forward weights on the source's index set.
    pub space: FiniteMMSpace,
    pub map: PointMap,
    pub certificate: OrderCertificate,
}

/// Full certification up to this many points, seeded spot pairs beyond.
const FULL_LIMIT: usize = 4000;
const SPOT_PAIRS: usize = 50_000;

/// Project an embedded sample and certify the projection as a 1-Lipschitz,
/// measure-preserving map onto its image.
pub fn project(x: &FiniteMMSpace, p: Projection, tol: f64) -> Result<Projected> {
    let (cloud, scale) = x.embedding().ok_or(MmError::MissingEmbedding)?;
    let src = cloud.kind();
    let (width, kind) = match p {
        Projection::Coordinate(k) => {
            let kind = match src {
                EmbeddedMetric::Euclidean | EmbeddedMetric::SphereGeodesic { .. } => EmbeddedMetric::Euclidean,
                EmbeddedMetric::Chebyshev => EmbeddedMetric::Chebyshev,
                _ => return Err(MmError::arg("real coordinate projection of a phase quotient is not defined")),
            };
            (k, kind)
        }
        Projection::HopfCoordinate(k) => {
            if matches!(src, EmbeddedMetric::Chebyshev | EmbeddedMetric::SphereGeodesic { .. }) {
                return Err(MmError::arg("Hopf projection needs a Euclidean or quotient source"));
            }
            (2 * k, EmbeddedMetric::PhaseQuotient)
        }
    };
    if width == 0 || width > cloud.dim() {
        return Err(MmError::arg(format!("projection to {width} of {} coordinates", cloud.dim())));
    }
    let coords: Vec<f64> = (0..x.len()).flat_map(|i| cloud.point(i)[..width].to_vec()).collect();
    let image = FiniteMMSpace::build(
        x.labels().to_vec(),
        Metric::Embedded(PointCloud::new(width, coords, kind)?),
        x.weights().to_vec(),
        x.grain(),
    )?
    .scaled(scale)?;
    let map = PointMap::identity(x.len());
    let certificate = if x.len() <= FULL_LIMIT {
        certify_lipschitz_order(&map, x, &image, tol)
    } else {
        let mut rng = rng::stream(x.len() as u64, &[tag::LAB, 0x50524f4a]);
        let mut worst: Option<(usize, usize, f64)> = None;
        for _ in 0..SPOT_PAIRS {
            let (i, j) = (rng.random_range(0..x.len()), rng.random_range(0..x.len()));
            let excess = image.dist(i, j) - x.dist(i, j);
            if worst.is_none_or(|w| excess > w.2) {
                worst = Some((i, j, excess));
            }
        }
        OrderCertificate {
            is_1lipschitz: worst.is_none_or(|w| w.2 <= tol),
            is_measure_preserving: true,
            worst_pair: worst,
        }
    };
    if !certificate.certifies() {
        return Err(MmError::arg(format!("projection failed certification: {:?}", certificate.worst_pair)));
    }
    Ok(Projected { space: image, map, certificate })
}

/// `f_{θ,n}`: radial clamp onto the Euclidean ball of radius `θ√n`.
pub fn radial_truncation(theta: f64, n: usize, x: &[f64]) -> Result<Vec<f64>> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(MmError::arg("θ must lie in (0, 1)"));
    }
    let cap = theta * (n as f64).sqrt();
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm <= cap {
        return Ok(x.to_vec());
    }
    Ok(x.iter().map(|a| a * (cap / norm)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::samplers::*;

    #[test]
    fn full_projection_is_an_isometry_of_chordal_spheres() {
        let x = sample_sphere(SphereSpec { n: 4, r: 2.0, metric: SphereMetric::Chordal, m: 60, seed: 1 }).unwrap();
        let p = project(&x, Projection::Coordinate(5), 1e-12).unwrap();
        for i in 0..60 {
            for j in 0..60 {
                assert!((p.space.dist(i, j) - x.dist(i, j)).abs() < 1e-12);
            }
        }
        assert!(project(&x, Projection::Coordinate(6), 1e-12).is_err());
    }

    #[test]
    fn projections_certify_on_both_sphere_metrics() {
        for metric in [SphereMetric::Geodesic, SphereMetric::Chordal] {
            let x = sample_sphere(SphereSpec { n: 6, r: 3.0, metric, m: 150, seed: 2 }).unwrap();
            let p = project(&x, Projection::Coordinate(2), 1e-12).unwrap();
            assert!(p.certificate.certifies());
        }
    }

    #[test]
    fn hopf_projection_commutes_with_the_quotient() {
        let spec = ProjectiveSpec { n: 3, r: 1.7, metric: ProjectiveMetric::ChordalQuotient, m: 80, seed: 5 };
        let down_then_quotient =
            project(&sample_cpn_lift(spec).unwrap(), Projection::HopfCoordinate(2), 1e-12).unwrap();
        let quotient_then_down = project(&sample_cpn(spec).unwrap(), Projection::HopfCoordinate(2), 1e-12).unwrap();
        for i in 0..80 {
            for j in 0..80 {
                assert_eq!(down_then_quotient.space.dist(i, j), quotient_then_down.space.dist(i, j));
            }
        }
    }

    #[test]
    fn radial_truncation_clamps() {
        let x = [3.0, 4.0];
        assert_eq!(radial_truncation(0.5, 100, &x).unwrap(), x.to_vec());
        let y = radial_truncation(0.5, 4, &x).unwrap();
        assert!((y[0] - 0.6).abs() < 1e-15 && (y[1] - 0.8).abs() < 1e-15);
        assert!(radial_truncation(1.0, 4, &x).is_err());
    }
}
