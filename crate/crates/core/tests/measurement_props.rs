mod common;

use common::arb_space;
use mmlimits_core::distances::hausdorff_measures;
use mmlimits_core::measurements::{measurement_set, pyramid_rho, PyramidApprox, RhoConfig};
use mmlimits_core::models::{sample_sphere, SphereMetric, SphereSpec};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn members_are_bounded_and_budgets_nest(x in arb_space(10), n in 1usize..4, r in 0.5f64..4.0, seed in any::<u64>()) {
        let src = PyramidApprox::Space(x);
        let small = measurement_set(&src, n, r, 4, seed).unwrap();
        let large = measurement_set(&src, n, r, 9, seed).unwrap();
        prop_assert_eq!(&large.members[..4], &small.members[..]);
        for m in &large.members {
            prop_assert!(m.is_within(r));
            prop_assert!((m.weights().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            prop_assert_eq!(m.dim(), n);
        }
    }

    #[test]
    fn rho_is_symmetric(x in arb_space(8), y in arb_space(8), seed in any::<u64>()) {
        let (px, py) = (PyramidApprox::Space(x), PyramidApprox::Space(y));
        let config = RhoConfig { k_max: 3, budget: 4, seed };
        let a = pyramid_rho(&px, &py, config).unwrap();
        let b = pyramid_rho(&py, &px, config).unwrap();
        prop_assert_eq!(a.value, b.value);
        prop_assert!(a.value + a.tail_bound <= 0.25);
    }
}

/// Clamping to `B^N_R` at most doubles the Hausdorff distance of the unclamped sets.
#[test]
fn truncation_at_most_doubles() {
    let mut worst = f64::NEG_INFINITY;
    for (i, (r1, r2)) in [(1.0, 1.5), (1.0, 3.0), (2.0, 2.5)].into_iter().enumerate() {
        let s = |r: f64, seed| {
            PyramidApprox::Space(
                sample_sphere(SphereSpec { n: 6, r, metric: SphereMetric::Geodesic, m: 300, seed }).unwrap(),
            )
        };
        let (x, y) = (s(r1, 10 + i as u64), s(r2, 20 + i as u64));
        for n in 1..=2 {
            let full = |p| measurement_set(p, n, f64::INFINITY, 8, 5).unwrap().members;
            let cut = |p| measurement_set(p, n, 1.0, 8, 5).unwrap().members;
            let h_cut = hausdorff_measures(&cut(&x), &cut(&y)).unwrap();
            let h_full = hausdorff_measures(&full(&x), &full(&y)).unwrap();
            worst = worst.max(h_cut - 2.0 * h_full);
        }
    }
    assert!(worst <= 0.05, "slack {worst}");
}
