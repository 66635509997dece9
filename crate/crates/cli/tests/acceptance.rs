//! Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as arguments to
//! run a subset.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use mmlimits_cli::{execute, CommandKind, ExperimentManifest, Radius, SpaceSpec};
use mmlimits_core::distances::{
    box_exact_tiny, box_upper, me_distance, prokhorov, prokhorov_line, BoxConfig, MeasureOnCommonSpace,
};
use mmlimits_core::invariants::{
    obs_diameter, separation, CandidateFamily, FamilyConfig, Observable, Provenance, ScalarPushforward,
};
use mmlimits_core::lab::{
    cpn_obsdiam_bounds, dissipation_scaling, levy_isoperimetry_check, mb_convergence, mb_convergence_quotient,
    nonconcentration_constant, nonconcentration_limit, normal_law_rearrangement, trichotomy, uniform_grid, ModelFamily,
    RadiusLaw, TrichotomyConfig, Verdict,
};
use mmlimits_core::measurements::{pyramid_rho, PyramidApprox, RhoConfig};
use mmlimits_core::mm::{DistanceMatrix, EmbeddedMetric, FiniteMMSpace, Metric, PointCloud};
use mmlimits_core::models::{
    gaussian_annulus_mass, sample_gaussian, sample_sphere, GaussianSpec, ProjectiveMetric, SphereMetric, SphereSpec,
};
use mmlimits_core::rng::{self, StreamRng};
use rand::seq::index::sample;
use rand::Rng;

/// Root of `2(1 − Φ(ε/√2)) = ε`, computed once with scipy's `brentq`.
const NONCONC_ROOT: f64 = 0.6472075949255223;
/// `2 I⁻¹(0.45)` (λ = 1, κ = 0.1), from scipy's `norm.ppf`.
const GAUSSIAN_LIMIT: f64 = 3.2897072539029444;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rng_for(seed: u64, tags: &[u64]) -> StreamRng {
    rng::stream(seed, tags)
}

/// `k` distinct points of a small integer grid with ℓ1 distances and counts in `lo..=hi`.
fn grid_space(rng: &mut StreamRng, k: usize, lo: u64, hi: u64) -> FiniteMMSpace {
    let cells: Vec<(i64, i64)> = sample(rng, 81, k).into_iter().map(|c| ((c / 9) as i64, (c % 9) as i64)).collect();
    let rows: Vec<Vec<f64>> =
        cells.iter().map(|a| cells.iter().map(|b| ((a.0 - b.0).abs() + (a.1 - b.1).abs()) as f64).collect()).collect();
    let mut counts: Vec<u64> = (0..k).map(|_| rng.random_range(lo..=hi)).collect();
    if counts.iter().all(|&c| c == 0) {
        counts[0] = 1;
    }
    let labels = (0..k).map(|i| format!("p{i}")).collect();
    FiniteMMSpace::from_counts(labels, Metric::Matrix(DistanceMatrix::from_rows(&rows).unwrap()), &counts).unwrap()
}

fn random_counts(rng: &mut StreamRng, k: usize) -> Vec<u64> {
    let mut c: Vec<u64> = (0..k).map(|_| rng.random_range(0..=4)).collect();
    if c.iter().all(|&v| v == 0) {
        c[rng.random_range(0..k)] = 1;
    }
    c
}

fn with_counts(x: &FiniteMMSpace, counts: &[u64]) -> FiniteMMSpace {
    FiniteMMSpace::from_counts(x.labels().to_vec(), x.metric().clone(), counts).unwrap()
}

fn json_of(manifest: &ExperimentManifest) -> serde_json::Value {
    let artifact = execute(manifest).unwrap();
    serde_json::from_str(&artifact.json).unwrap()
}

fn c1_obs_diameter_limit() -> Outcome {
    let mut m = ExperimentManifest::new(CommandKind::Obsdiam, 7);
    m.spaces = vec![SpaceSpec::Sphere {
        n: 200,
        r: Radius::Law("sqrt_n".into()),
        metric: SphereMetric::Geodesic,
        m: 5000,
        seed: None,
    }];
    m.kappa = Some(mmlimits_cli::manifest::OneOrMany::One(0.1));
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let t = Instant::now();
    let v = pool.install(|| json_of(&m));
    let secs = t.elapsed().as_secs_f64();
    let est = v["result"]["estimate"].as_f64().unwrap();
    outcome(
        (2.9..=3.6).contains(&est) && secs < 120.0,
        format!("estimate {est:.4} in [2.9, 3.6] (limit {GAUSSIAN_LIMIT:.4}), single-threaded {secs:.1}s < 120s"),
    )
}

fn c2_maxwell_boltzmann() -> Outcome {
    let t = Instant::now();
    let rows = mb_convergence(&[25, 50, 100, 200], 1, 1.0, 20_000, 7).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let d: Vec<f64> = rows.iter().map(|r| r.d_p).collect();
    let last = *d.last().unwrap();
    let banded = d.windows(2).all(|w| w[1] <= w[0] + 0.01);
    outcome(
        last <= 0.05 && banded && secs < 180.0,
        format!("d_P over n = 25..200: {d:.4?}; final ≤ 0.05, nonincreasing within 0.01, {secs:.1}s < 180s"),
    )
}

fn c3_trichotomy() -> Outcome {
    let run = |law: &str| {
        let c = TrichotomyConfig::new(RadiusLaw::parse(law).unwrap(), ModelFamily::Sphere, vec![25, 50, 100, 200], 7);
        trichotomy(&c).unwrap()
    };
    let cases = [("n^(1/3)", Verdict::Levy), ("n", Verdict::Dissipate), ("sqrt_n", Verdict::Converge)];
    let mut pass = true;
    let mut parts = Vec::new();
    for (law, want) in cases {
        let r = run(law);
        pass &= r.verdict == want;
        parts.push(format!("{law} -> {:?}", r.verdict));
    }
    let again = run("sqrt_n") == run("sqrt_n");
    pass &= again;
    outcome(pass, format!("{}; rerun identical: {again}", parts.join(", ")))
}

fn c4_dissipation_scaling() -> Outcome {
    let mut worst = 0.0f64;
    let mut all_exact = true;
    for i in 0..20u64 {
        let mut rng = rng_for(7, &[4, i]);
        let n = rng.random_range(2..10);
        let r = rng.random_range(0.5..50.0);
        let m = rng.random_range(6..12);
        let k = rng.random_range(0.1..0.4);
        let c = dissipation_scaling(n, r, m, &[k, k], 100 + i).unwrap();
        all_exact &= c.exact;
        worst = worst.max(c.relative_error);
    }
    outcome(
        worst <= 1e-12 && all_exact,
        format!("20 instances, max relative error {worst:.2e} ≤ 1e-12, exact solver: {all_exact}"),
    )
}

fn c5_scale_law() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..20u64 {
        let mut rng = rng_for(7, &[5, i]);
        let x = if i % 2 == 0 {
            let k = rng.random_range(2..12);
            grid_space(&mut rng, k, 1, 5)
        } else {
            let (m, dim) = (rng.random_range(3..30), rng.random_range(1..4));
            let coords = (0..m * dim).map(|_| rng.random_range(-3.0..3.0)).collect();
            FiniteMMSpace::uniform_cloud(PointCloud::new(dim, coords, EmbeddedMetric::Euclidean).unwrap()).unwrap()
        };
        let kappa = rng.random_range(0.05..0.5);
        let config = FamilyConfig { directions: 8, point_functions: None, seed: i };
        let base = obs_diameter(&x, kappa, &CandidateFamily::default_for(&x, config)).unwrap();
        for t in [0.5, 2.0, 10.0] {
            let tx = x.scaled(t).unwrap();
            let scaled = obs_diameter(&tx, kappa, &CandidateFamily::default_for(&tx, config)).unwrap();
            let want = t * base.value;
            let err = if want == 0.0 { scaled.value.abs() } else { (scaled.value - want).abs() / want };
            worst = worst.max(err);
        }
    }
    outcome(worst <= 1e-12, format!("20 spaces × t ∈ {{1/2, 2, 10}}: max relative error {worst:.2e} ≤ 1e-12"))
}

fn c6_sandwich() -> Outcome {
    let mut failures = Vec::new();
    let mut inexact = 0;
    for i in 0..50u64 {
        let mut rng = rng_for(7, &[6, i]);
        let k = rng.random_range(1..=12);
        let x = grid_space(&mut rng, k, 1, 5);
        let kappa = rng.random_range(0.05..0.45);
        let sep = separation(&x, &[kappa, kappa]).unwrap();
        if !sep.exact {
            inexact += 1;
            continue;
        }
        let family = CandidateFamily::distance_functions(&x);
        let lower = obs_diameter(&x, 2.0 * kappa, &family).unwrap().value;
        let kappa_prime = kappa * rng.random_range(0.5..0.99);
        let mut augmented = family.clone();
        if !sep.witness_sets[0].is_empty() {
            augmented.push(Observable::DistanceToSet(sep.witness_sets[0].clone()), Provenance::DistanceToSet);
        }
        let upper = obs_diameter(&x, kappa_prime, &augmented).unwrap().value;
        if !(lower <= sep.value && sep.value <= upper) {
            failures.push(format!("space {i}: {lower} ≤ {} ≤ {upper}", sep.value));
        }
    }
    outcome(
        failures.is_empty() && inexact == 0,
        format!("50 spaces, |X| ≤ 12: violations {}, non-exact separations {inexact} {failures:?}", failures.len()),
    )
}

fn c7_metric_comparisons() -> Outcome {
    let mut me_bad = 0;
    for i in 0..100u64 {
        let mut rng = rng_for(7, &[7, i]);
        let len = rng.random_range(1..40);
        let counts: Vec<u64> = (0..len).map(|_| rng.random_range(1..=5)).collect();
        let total: u64 = counts.iter().sum();
        let w: Vec<f64> = counts.iter().map(|&c| c as f64 / total as f64).collect();
        let draw =
            |rng: &mut StreamRng| -> Vec<f64> { (0..len).map(|_| rng.random_range(-20..=20) as f64 * 0.05).collect() };
        let (f, g) = (draw(&mut rng), draw(&mut rng));
        let pf = ScalarPushforward::new(f.clone(), w.clone(), Some(total)).unwrap();
        let pg = ScalarPushforward::new(g.clone(), w.clone(), Some(total)).unwrap();
        if prokhorov_line(&pf, &pg) > me_distance(&f, &g, &w, Some(total), false).unwrap() {
            me_bad += 1;
        }
    }
    let mut box_bad = 0;
    let mut instances = 0;
    for seed in 0..20u64 {
        for k in 1..=4 {
            let mut rng = rng_for(seed, &[71, k as u64]);
            let x = grid_space(&mut rng, k, 1, 1);
            let (a, b) = (random_counts(&mut rng, k), random_counts(&mut rng, k));
            let (xa, xb) = (with_counts(&x, &a), with_counts(&x, &b));
            // zero counts drop out of xa and xb; the measures keep the whole ground set
            let on_x = |c: &[u64]| {
                let total: u64 = c.iter().sum();
                let w = c.iter().map(|&v| v as f64 / total as f64).collect();
                MeasureOnCommonSpace::with_grain(&x, w, Some(total)).unwrap()
            };
            let dp = prokhorov(&on_x(&a), &on_x(&b)).unwrap();
            if box_exact_tiny(&xa, &xb).unwrap() > 2.0 * dp {
                box_bad += 1;
            }
            instances += 1;
        }
    }
    outcome(
        me_bad == 0 && box_bad == 0,
        format!("d_P ≤ me violations {me_bad}/100; box ≤ 2 d_P violations {box_bad}/{instances}"),
    )
}

fn c8_box_oracle() -> Outcome {
    let mut worst = 0.0f64;
    let mut instances = 0;
    let mut off = 0;
    for seed in 0..20u64 {
        for kx in 1..=4 {
            for ky in 1..=4 {
                let mut rng = rng_for(seed, &[8, kx as u64, ky as u64]);
                let x = grid_space(&mut rng, kx, 1, 5);
                let y = grid_space(&mut rng, ky, 1, 5);
                let exact = box_exact_tiny(&x, &y).unwrap();
                let upper = box_upper(&x, &y, BoxConfig { seed, ..BoxConfig::default() }).value;
                let gap = (upper - exact).abs();
                worst = worst.max(gap);
                off += (gap > 1e-9) as usize;
                instances += 1;
            }
        }
    }
    outcome(off == 0, format!("{instances} instances, |upper − exact| > 1e-9 on {off}, worst {worst:.3e}"))
}

fn c9_pyramid() -> Outcome {
    let sphere = |r: f64, seed: u64| {
        PyramidApprox::Space(
            sample_sphere(SphereSpec { n: 30, r, metric: SphereMetric::Geodesic, m: 1000, seed }).unwrap(),
        )
    };
    let root = 30f64.sqrt();
    let x = sphere(root, 7);
    let x2 = sphere(root, rng::derive(7, &[9]));
    let far = sphere(5.0 * root, 7);
    let gamma = PyramidApprox::Space(sample_gaussian(GaussianSpec { n: 31, lambda: 1.0, m: 1000, seed: 7 }).unwrap());
    let config = RhoConfig { k_max: 6, budget: 8, seed: 7 };
    let same = pyramid_rho(&x, &x2, config).unwrap();
    let near = pyramid_rho(&x, &gamma, config).unwrap();
    let away = pyramid_rho(&far, &gamma, config).unwrap();
    let bounded = [&same, &near, &away].iter().all(|r| r.value + r.tail_bound <= 0.25);
    outcome(
        same.value <= 0.05 && bounded && near.value < away.value,
        format!(
            "independent samples {:.4} ≤ 0.05; value + tail ≤ 0.25: {bounded}; to Gaussian: √30 {:.4} < 5√30 {:.4}",
            same.value, near.value, away.value
        ),
    )
}

fn c10_nonconcentration() -> Outcome {
    let rows = nonconcentration_constant(&[2, 10, 50], 100_000, 7).unwrap();
    let v: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let spread = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min);
    let near = v.iter().all(|x| (x - NONCONC_ROOT).abs() <= 0.03);
    let root_ok = (nonconcentration_limit() - NONCONC_ROOT).abs() <= 1e-9;
    outcome(
        spread <= 0.02 && near && root_ok,
        format!("n = 2, 10, 50: {v:.4?}, spread {spread:.4} ≤ 0.02, within 0.03 of {NONCONC_ROOT:.4}: {near}"),
    )
}

fn c11_annulus_and_caps() -> Outcome {
    let (n, theta, m) = (100, 0.8, 100_000);
    let g = sample_gaussian(GaussianSpec { n: n + 1, lambda: 1.0, m, seed: 7 }).unwrap();
    let (cloud, _) = g.embedding().unwrap();
    let root = (n as f64).sqrt();
    let inside = (0..m)
        .filter(|&i| {
            let norm = cloud.point(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            theta * root <= norm && norm <= root / theta
        })
        .count();
    let mc = inside as f64 / m as f64;
    let exact = gaussian_annulus_mass(n, theta).unwrap();
    let far = gaussian_annulus_mass(500, 0.9).unwrap();
    let rows = levy_isoperimetry_check(10, 20_000, 20, 0.3, 7).unwrap();
    let iso = rows.iter().filter(|r| r.pass).count();
    outcome(
        (mc - exact).abs() <= 0.01 && far >= 0.99 && iso == 20,
        format!(
            "annulus(100, 0.8): closed form {exact:.5} vs MC {mc:.5}; annulus(500, 0.9) = {far:.5} ≥ 0.99; \
             isoperimetry {iso}/20"
        ),
    )
}

fn c12_normal_law() -> Outcome {
    let mut m = ExperimentManifest::new(CommandKind::NormalLaw, 7);
    m.spaces = vec![SpaceSpec::Sphere {
        n: 200,
        r: Radius::Law("sqrt_n".into()),
        metric: SphereMetric::Geodesic,
        m: 100_000,
        seed: None,
    }];
    let v = json_of(&m);
    let violation = v["result"]["lipschitz_violation"].as_f64().unwrap();
    let monotone = v["result"]["monotone"].as_bool().unwrap();
    // monotone on arbitrary inputs too
    let mut always = true;
    for i in 0..20u64 {
        let mut rng = rng_for(7, &[12, i]);
        let len = rng.random_range(1..500);
        let values = (0..len).map(|_| rng.random_range(-5.0..5.0)).collect();
        let p = ScalarPushforward::uniform(values).unwrap();
        let r = normal_law_rearrangement(&p, &uniform_grid(-3.0, 3.0, 0.1)).unwrap();
        always &= r.monotone && r.alpha.windows(2).all(|w| w[0] <= w[1]);
    }
    outcome(
        violation <= 0.05 && monotone && always,
        format!("distance function on S^200(√200): violation {violation:.4} ≤ 0.05, monotone {monotone}; random inputs monotone: {always}"),
    )
}

fn c13_projective() -> Outcome {
    let b = cpn_obsdiam_bounds(100, 201f64.sqrt(), 0.1, 5000, 7, ProjectiveMetric::FubiniStudy, 0.15).unwrap();
    let rows = mb_convergence_quotient(&[25, 50, 100, 200], 1, 1.0, 2000, 7).unwrap();
    let contracted = rows.iter().all(|r| r.quotient <= r.sphere);
    let pairs: Vec<String> = rows.iter().map(|r| format!("{:.4}≤{:.4}", r.quotient, r.sphere)).collect();
    outcome(
        b.within && contracted,
        format!(
            "estimate {:.4} in [{:.4} − 0.15, {:.4} + 0.15]; quotient ≤ sphere: {} ({})",
            b.estimate,
            b.lower_ref,
            b.upper_ref,
            contracted,
            pairs.join(", ")
        ),
    )
}

fn run_twice(dir: &Path, name: &str, manifest: &str) -> bool {
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, manifest).unwrap();
    let read = || {
        let status = Command::new(env!("CARGO_BIN_EXE_mmlimits")).arg("run").arg(&path).status().unwrap();
        assert!(status.success(), "{name} failed");
        let json = std::fs::read(dir.join(format!("{name}.out.json"))).unwrap();
        let csv = std::fs::read(dir.join(format!("{name}.out.csv"))).ok();
        (json, csv)
    };
    let first = read();
    let second = read();
    first == second
}

fn c14_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().display();
    let manifests = [
        (
            "trichotomy",
            format!(
                r#"{{"command": "trichotomy", "n_grid": "25:100", "radius_law": "sqrt_n", "m": 600, "seed": 7,
                    "output": {{"json": "{d}/trichotomy.out.json", "csv": "{d}/trichotomy.out.csv"}}}}"#
            ),
        ),
        (
            "mb",
            format!(
                r#"{{"command": "mb", "n_grid": [10, 40], "m": 2000, "seed": 7, "options": {{"k": 2}},
                    "output": {{"json": "{d}/mb.out.json", "csv": "{d}/mb.out.csv"}}}}"#
            ),
        ),
        (
            "obsdiam",
            format!(
                r#"{{"command": "obsdiam", "kappa": 0.1, "seed": 7,
                    "spaces": [{{"kind": "cpn", "n": 20, "r": "sqrt_2n_plus_1", "m": 800}}],
                    "output": {{"json": "{d}/obsdiam.out.json"}}}}"#
            ),
        ),
        (
            "sample",
            format!(
                r#"{{"command": "sample", "seed": 7, "spaces": [{{"kind": "sphere", "n": 5, "r": 2.5, "m": 200}}],
                    "output": {{"json": "{d}/sample.out.json"}}}}"#
            ),
        ),
    ];
    let mut same = Vec::new();
    for (name, text) in &manifests {
        same.push((name.to_string(), run_twice(dir.path(), name, text)));
    }
    let pass = same.iter().all(|s| s.1);
    outcome(pass, format!("two runs byte-identical: {same:?}"))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 14] = [
        (1, "observable-diameter limit", c1_obs_diameter_limit),
        (2, "Maxwell-Boltzmann convergence", c2_maxwell_boltzmann),
        (3, "trichotomy verdicts", c3_trichotomy),
        (4, "dissipation scaling identity", c4_dissipation_scaling),
        (5, "observable-diameter scale law", c5_scale_law),
        (6, "observable diameter / separation sandwich", c6_sandwich),
        (7, "metric comparison lemmas", c7_metric_comparisons),
        (8, "box oracle equivalence", c8_box_oracle),
        (9, "pyramid metric estimates", c9_pyramid),
        (10, "non-concentration constant", c10_nonconcentration),
        (11, "annulus, caps and isoperimetry", c11_annulus_and_caps),
        (12, "normal law rearrangement", c12_normal_law),
        (13, "projective bracket and quotient contraction", c13_projective),
        (14, "reproducibility", c14_reproducibility),
    ];
    let selected: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let t = Instant::now();
        let o = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        failed += !o.pass as usize;
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.1}s]",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
