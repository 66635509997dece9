use mmlimits_core::lab::levy_isoperimetry_check;
use mmlimits_core::models::{
    gaussian_annulus_mass, sample_cpn, sample_cpn_lift, sample_gaussian, sample_sphere, GaussianSpec, ProjectiveMetric,
    ProjectiveSpec, SphereMetric, SphereSpec,
};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn geodesic_dominates_chordal(n in 1usize..30, r in 0.1f64..20.0, seed in any::<u64>()) {
        let spec = |metric| SphereSpec { n, r, metric, m: 40, seed };
        let g = sample_sphere(spec(SphereMetric::Geodesic)).unwrap();
        let c = sample_sphere(spec(SphereMetric::Chordal)).unwrap();
        for i in 0..40 {
            for j in 0..40 {
                prop_assert!(g.dist(i, j) >= c.dist(i, j));
                for k in 0..40 {
                    prop_assert!(g.dist(i, j) <= g.dist(i, k) + g.dist(k, j) + 1e-9);
                    prop_assert!(c.dist(i, j) <= c.dist(i, k) + c.dist(k, j) + 1e-9);
                }
            }
        }
    }

    #[test]
    fn hopf_quotient_contracts(n in 1usize..12, r in 0.1f64..10.0, seed in any::<u64>()) {
        let spec = |metric| ProjectiveSpec { n, r, metric, m: 60, seed };
        let lift = sample_cpn_lift(spec(ProjectiveMetric::ChordalQuotient)).unwrap();
        for metric in [ProjectiveMetric::ChordalQuotient, ProjectiveMetric::FubiniStudy] {
            let q = sample_cpn(spec(metric)).unwrap();
            let sphere_geodesic = |i, j| {
                let c: f64 = lift.dist(i, j) / r;
                r * 2.0 * (c / 2.0).min(1.0).asin()
            };
            for i in 0..60 {
                for j in 0..60 {
                    let bound = match metric {
                        ProjectiveMetric::ChordalQuotient => lift.dist(i, j),
                        ProjectiveMetric::FubiniStudy => sphere_geodesic(i, j),
                    };
                    prop_assert!(q.dist(i, j) <= bound + 1e-9);
                }
            }
        }
    }
}

#[test]
fn annulus_mass_grows_with_dimension() {
    for theta in [0.5, 0.7, 0.8, 0.9, 0.95] {
        let mut prev = 0.0;
        for n in [1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 5000] {
            let v = gaussian_annulus_mass(n, theta).unwrap();
            assert!(v >= prev - 1e-12, "θ = {theta}, n = {n}");
            prev = v;
        }
        assert!(prev > 0.95);
    }
}

#[test]
fn annulus_mass_against_monte_carlo() {
    let (n, theta, m) = (20, 0.8, 20_000);
    let g = sample_gaussian(GaussianSpec { n: n + 1, lambda: 1.0, m, seed: 3 }).unwrap();
    let (cloud, _) = g.embedding().unwrap();
    let root = (n as f64).sqrt();
    let inside = (0..m)
        .filter(|&i| {
            let norm = cloud.point(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            theta * root <= norm && norm <= root / theta
        })
        .count();
    let exact = gaussian_annulus_mass(n, theta).unwrap();
    let se = (exact * (1.0 - exact) / m as f64).sqrt();
    assert!((inside as f64 / m as f64 - exact).abs() <= 4.0 * se + 1e-3);
}

#[test]
fn isoperimetry_spot_check() {
    let rows = levy_isoperimetry_check(10, 8000, 10, 0.3, 11).unwrap();
    assert!(rows.iter().all(|r| r.pass), "{rows:?}");
}
