mod common;

use common::{arb_space, arb_weights, grid_space};
use mmlimits_core::distances::{box_exact_tiny, box_upper, me_distance, prokhorov, BoxConfig, MeasureOnCommonSpace};
use mmlimits_core::mm::FiniteMMSpace;
use proptest::prelude::*;

fn ground_and_three() -> impl Strategy<Value = (FiniteMMSpace, Vec<f64>, Vec<f64>, Vec<f64>)> {
    arb_space(10).prop_flat_map(|x| {
        let k = x.len();
        (Just(x), arb_weights(k), arb_weights(k), arb_weights(k))
    })
}

fn tiny_pair() -> impl Strategy<Value = (FiniteMMSpace, FiniteMMSpace)> {
    (arb_space(4), arb_space(4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prokhorov_is_a_metric((x, a, b, c) in ground_and_three()) {
        let m = |w: &Vec<f64>| MeasureOnCommonSpace::new(&x, w.clone()).unwrap();
        let (ma, mb, mc) = (m(&a), m(&b), m(&c));
        let ab = prokhorov(&ma, &mb).unwrap();
        prop_assert_eq!(ab, prokhorov(&mb, &ma).unwrap());
        prop_assert_eq!(prokhorov(&ma, &ma).unwrap(), 0.0);
        let ac = prokhorov(&ma, &mc).unwrap();
        let cb = prokhorov(&mc, &mb).unwrap();
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn me_is_a_metric(
        f in proptest::collection::vec(-5.0f64..5.0, 8),
        g in proptest::collection::vec(-5.0f64..5.0, 8),
        h in proptest::collection::vec(-5.0f64..5.0, 8),
    ) {
        let w = vec![0.125; 8];
        let d = |a: &[f64], b: &[f64]| me_distance(a, b, &w, Some(8), false).unwrap();
        prop_assert_eq!(d(&f, &g), d(&g, &f));
        prop_assert!(d(&f, &g) <= d(&f, &h) + d(&h, &g) + 1e-12);
    }

    #[test]
    fn box_bounds((x, y) in tiny_pair()) {
        let exact = box_exact_tiny(&x, &y).unwrap();
        prop_assert!((0.0..=1.0).contains(&exact));
        let upper = box_upper(&x, &y, BoxConfig::default()).value;
        prop_assert!(upper >= exact - 1e-12);
    }

    #[test]
    fn box_of_reweightings((x, a, b, _) in ground_and_three().prop_filter("tiny", |t| t.0.len() <= 4)) {
        let xa = x.reweighted(a.clone()).unwrap();
        let xb = x.reweighted(b.clone()).unwrap();
        let dp = prokhorov(
            &MeasureOnCommonSpace::new(&x, a).unwrap(),
            &MeasureOnCommonSpace::new(&x, b).unwrap(),
        ).unwrap();
        prop_assert!(box_exact_tiny(&xa, &xb).unwrap() <= 2.0 * dp + 1e-12);
    }
}

#[test]
fn box_of_space_with_itself_is_zero() {
    let x = grid_space(&[(0, 0), (3, 0), (0, 2)], &[1, 2, 3]);
    assert_eq!(box_exact_tiny(&x, &x).unwrap(), 0.0);
    assert_eq!(box_upper(&x, &x, BoxConfig::default()).value, 0.0);
}
