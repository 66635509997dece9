use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{MmError, Result};
use crate::models::{sample_sphere, spherical_cap_mass, SphereMetric, SphereSpec};
use crate::rng::{self, tag};
use crate::special::bisect_increasing;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IsoRow {
    pub subset: usize,
    pub caps: usize,
    /// Sample mass of `Ω`.
    pub mass: f64,
    /// Radius of the cap of the same mass.
    pub cap_radius: f64,
    /// Sample mass of the open `t`-neighbourhood of `Ω`.
    pub neighbourhood: f64,
    /// Mass of the `t`-neighbourhood of that cap.
    pub predicted: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Spot check of Lévy's isoperimetric inequality `σ(U_t(Ω)) ≥ σ(U_t(B))` for a cap `B` of the
/// same mass, on an `m`-point sample of `S^n(1)`. `Ω` is a union of one to three closed caps
/// centred at sample points; its mass and the mass of its `t`-neighbourhood are read off the
/// sample. The tolerance is three standard errors of the neighbourhood mass plus the error
/// the mass of `Ω` carries into the comparison cap.
pub fn levy_isoperimetry_check(n: usize, m: usize, subsets: usize, t: f64, seed: u64) -> Result<Vec<IsoRow>> {
    use std::f64::consts::PI;
    if !(t > 0.0) || m < 2 || n < 2 {
        return Err(MmError::arg("isoperimetry check needs n ≥ 2, m ≥ 2 and t > 0"));
    }
    let x = sample_sphere(SphereSpec { n, r: 1.0, metric: SphereMetric::Geodesic, m, seed })?;
    let cap = |r: f64| spherical_cap_mass(n, r.clamp(0.0, PI), 1.0);
    // density of the cap mass in the radius, up to the normalising constant ratio
    let density_ratio = |a: f64, b: f64| (b.sin() / a.sin()).powi(n as i32 - 1);
    (0..subsets)
        .into_par_iter()
        .map(|s| {
            let mut rng = rng::stream(seed, &[tag::LAB, 9, s as u64]);
            let centers: Vec<(usize, f64)> = (0..rng.random_range(1..=3usize))
                .map(|_| (rng.random_range(0..m), rng.random_range(0.9..1.5)))
                .collect();
            let gap = |i: usize| centers.iter().map(|&(c, rad)| x.dist(i, c) - rad).fold(f64::INFINITY, f64::min);
            let (inside, near) = (0..m).fold((0usize, 0usize), |(a, b), i| {
                let g = gap(i);
                (a + (g <= 0.0) as usize, b + (g < t) as usize)
            });
            let mf = m as f64;
            let mass = inside as f64 / mf;
            let neighbourhood = near as f64 / mf;
            let cap_radius = bisect_increasing(|r| cap(r).unwrap_or(1.0), mass, 0.0, PI);
            let predicted = cap(cap_radius + t)?;
            let se = |p: f64| (p * (1.0 - p) / mf).sqrt();
            let carried = if cap_radius + t < PI { density_ratio(cap_radius, cap_radius + t) } else { 0.0 };
            let tolerance = 3.0 * (se(predicted) + carried * se(mass)) + 1.0 / mf;
            Ok(IsoRow {
                subset: s,
                caps: centers.len(),
                mass,
                cap_radius,
                neighbourhood,
                predicted,
                tolerance,
                pass: neighbourhood >= predicted - tolerance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_run_passes() {
        let rows = levy_isoperimetry_check(10, 3000, 4, 0.3, 1).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.pass && r.mass > 0.0), "{rows:?}");
        assert!(levy_isoperimetry_check(10, 10, 1, 0.0, 1).is_err());
    }
}
