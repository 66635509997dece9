use mmlimits_core::distances::{box_upper, BoxConfig};
use mmlimits_core::models::{sample_sphere, SphereMetric, SphereSpec};

// Two independent 500-point samples of S^50(√50) sit far apart in the box metric: pairwise
// distances concentrate near π√50/2 with unit spread, so no large matched part has small
// distortion. The value is a regression record, not a consistency bound.
#[test]
fn independent_high_dimensional_samples() {
    let spec = |seed| SphereSpec { n: 50, r: 50f64.sqrt(), metric: SphereMetric::Geodesic, m: 500, seed };
    let (x, y) = (sample_sphere(spec(1)).unwrap(), sample_sphere(spec(2)).unwrap());
    let config = BoxConfig { restarts: 2, moves: 8, exhaustive_support: 12, seed: 7 };
    let up = box_upper(&x, &y, config);
    eprintln!("box_upper = {}", up.value);
    assert!(up.value > 0.9 && up.value <= 1.0, "{}", up.value);
    assert!(up.coupling.is_coupling_of(x.weights(), y.weights(), 1e-9));
    assert_eq!(box_upper(&x, &x, config).value, 0.0);
}
