use std::fs;
use std::path::PathBuf;

use mmlimits_core::distances::{
    box_exact_tiny, box_upper, me_distance, prokhorov, prokhorov_rn, BoxConfig, MeasureOnCommonSpace, BOX_TINY_LIMIT,
};
use mmlimits_core::invariants::{obs_diameter, separation, CandidateFamily, FamilyConfig, ScalarPushforward};
use mmlimits_core::lab::{
    cpn_obsdiam_bounds, mb_convergence, mb_convergence_quotient, nonconcentration_constant, nonconcentration_limit,
    normal_law_rearrangement, trichotomy, uniform_grid, ModelFamily, TrichotomyConfig,
};
use mmlimits_core::measurements::{measurement_set_cached, pyramid_rho_with, MeasureOnRN, PyramidApprox, RhoConfig};
use mmlimits_core::mm::{FiniteMMSpace, SpaceFile};
use mmlimits_core::models::{
    gaussian_obs_diameter, sample_cpn, sample_cpn_lift, sample_gaussian, sample_sphere, GaussianSpec, ProjectiveMetric,
    ProjectiveSpec, SphereSpec,
};
use serde::{Deserialize, Serialize};

use crate::manifest::{CommandKind, ExperimentManifest, ScalarFunction, SpaceSpec};
use crate::output::Artifact;
use crate::{CliError, CACHE_ENV};

/// Largest sample for any sampled space.
const MAX_M: usize = 1_000_000;
/// Largest number of stored coordinates (`m · dim`).
const MAX_COORDS: usize = 50_000_000;
/// Largest sample when every distance function joins the observable family.
const MAX_M_ALL_POINTS: usize = 5_000;
/// Largest sample for seeded observable families and trichotomy cells.
const MAX_M_OBS: usize = 50_000;
/// Largest sample for Prokhorov cells.
const MAX_M_DP: usize = 20_000;

fn resource(what: &str, m: usize, cap: usize) -> CliError {
    CliError::Resource(format!("{what}: m = {m} exceeds the cap {cap}; reduce m"))
}

fn cap(what: &str, m: usize, limit: usize) -> Result<(), CliError> {
    if m > limit {
        return Err(resource(what, m, limit));
    }
    Ok(())
}

fn read_space(path: &PathBuf) -> Result<FiniteMMSpace, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read space file {}: {e}", path.display())))?;
    FiniteMMSpace::from_json(&text).map_err(|e| CliError::Validation(format!("space file {}: {e}", path.display())))
}

pub(crate) fn build_space(spec: &SpaceSpec, seed: u64) -> Result<FiniteMMSpace, CliError> {
    if let Some(m) = spec.m() {
        cap("sampled space", m, MAX_M)?;
    }
    let coords = |dim: usize, m: usize| cap("sampled coordinates", dim.saturating_mul(m), MAX_COORDS);
    let space = match spec {
        SpaceSpec::Sphere { n, r, metric, m, seed: s } => {
            coords(n + 1, *m)?;
            sample_sphere(SphereSpec { n: *n, r: r.at(*n)?, metric: *metric, m: *m, seed: s.unwrap_or(seed) })?
        }
        SpaceSpec::Gaussian { n, lambda, m, seed: s } => {
            coords(*n, *m)?;
            sample_gaussian(GaussianSpec { n: *n, lambda: *lambda, m: *m, seed: s.unwrap_or(seed) })?
        }
        SpaceSpec::Cpn { n, r, metric, m, seed: s } => {
            coords(2 * n + 2, *m)?;
            sample_cpn(ProjectiveSpec { n: *n, r: r.at(*n)?, metric: *metric, m: *m, seed: s.unwrap_or(seed) })?
        }
        SpaceSpec::CpnLift { n, r, m, seed: s } => {
            coords(2 * n + 2, *m)?;
            let spec = ProjectiveSpec {
                n: *n,
                r: r.at(*n)?,
                metric: ProjectiveMetric::ChordalQuotient,
                m: *m,
                seed: s.unwrap_or(seed),
            };
            sample_cpn_lift(spec)?
        }
        SpaceSpec::File { path } => read_space(path)?,
    };
    Ok(space)
}

fn f(v: f64) -> String {
    format!("{v}")
}

/// Embedded coordinates (scale applied) as a measure on `R^N`.
fn coordinate_measure(x: &FiniteMMSpace) -> Result<MeasureOnRN, CliError> {
    let (cloud, scale) = x
        .embedding()
        .ok_or_else(|| CliError::Validation("`rn` comparison needs spaces with embedded coordinates".into()))?;
    let coords = cloud.coords().iter().map(|v| v * scale).collect();
    Ok(MeasureOnRN::from_weighted(cloud.dim(), coords, x.weights().to_vec(), x.grain())?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MeValues {
    f: Vec<f64>,
    g: Vec<f64>,
    #[serde(default)]
    weights: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct ValidateResult {
    valid: bool,
    report: mmlimits_core::mm::ValidationReport,
}

#[derive(Serialize)]
struct ObsDiamResult {
    estimate: f64,
    witness: usize,
    provenance: mmlimits_core::invariants::Provenance,
    lower_bound: bool,
    family_size: usize,
    /// `2λI⁻¹((1 − κ)/2)` with `λ = r/√n`, for spheres.
    #[serde(skip_serializing_if = "Option::is_none")]
    gaussian_limit: Option<f64>,
}

#[derive(Serialize)]
struct BoxResult {
    exact: Option<f64>,
    upper: f64,
    coupling: Vec<(usize, usize, f64)>,
}

#[derive(Serialize)]
struct NormalLawResult {
    function: ScalarFunction,
    median: f64,
    /// `max |α(x) − x − median|` over the grid.
    identity_error: f64,
    #[serde(flatten)]
    rearrangement: mmlimits_core::lab::Rearrangement,
}

#[derive(Serialize)]
struct NonconcResult {
    limit: f64,
    spread: f64,
    rows: Vec<mmlimits_core::lab::NonconcRow>,
}

fn family_config(manifest: &ExperimentManifest) -> FamilyConfig {
    FamilyConfig {
        directions: manifest.options.directions.unwrap_or(64),
        point_functions: manifest.options.point_functions,
        seed: manifest.seed,
    }
}

fn obs_cap(manifest: &ExperimentManifest, m: usize) -> Result<(), CliError> {
    match manifest.options.point_functions {
        None => cap("observable diameter with every distance function", m, MAX_M_ALL_POINTS),
        Some(_) => cap("observable diameter", m, MAX_M_OBS),
    }
}

/// Run a checked manifest.
pub fn execute(manifest: &ExperimentManifest) -> Result<Artifact, CliError> {
    manifest.check()?;
    let seed = manifest.seed;
    let opts = &manifest.options;
    match manifest.command {
        CommandKind::Validate => {
            let report = match &manifest.spaces[0] {
                SpaceSpec::File { path } => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
                    let file: SpaceFile = serde_json::from_str(&text).map_err(|e| {
                        CliError::Validation(format!("{} line {} column {}: {e}", path.display(), e.line(), e.column()))
                    })?;
                    file.validate()
                }
                spec => build_space(spec, seed)?.validate(),
            };
            let valid = report.is_valid();
            let failure = (!valid).then(|| CliError::Validation(format!("invalid space: {report}")));
            let mut a = Artifact::report(manifest, ValidateResult { valid, report })?;
            a.failure = failure;
            Ok(a)
        }
        CommandKind::Sample => {
            let x = build_space(&manifest.spaces[0], seed)?;
            Artifact::report(manifest, x.to_file())
        }
        CommandKind::Obsdiam => {
            let spec = &manifest.spaces[0];
            let x = build_space(spec, seed)?;
            obs_cap(manifest, x.len())?;
            let kappa = manifest.kappa()?;
            let family = CandidateFamily::default_for(&x, family_config(manifest));
            let est = obs_diameter(&x, kappa, &family)?;
            let gaussian_limit = match spec {
                SpaceSpec::Sphere { n, r, .. } => Some(gaussian_obs_diameter(r.at(*n)? / (*n as f64).sqrt(), kappa)?),
                _ => None,
            };
            Artifact::report(
                manifest,
                ObsDiamResult {
                    estimate: est.value,
                    witness: est.witness,
                    provenance: est.provenance,
                    lower_bound: est.lower_bound,
                    family_size: family.len(),
                    gaussian_limit,
                },
            )
        }
        CommandKind::Sep => {
            let x = build_space(&manifest.spaces[0], seed)?;
            cap("separation", x.len(), MAX_M_OBS)?;
            Artifact::report(manifest, separation(&x, &manifest.kappas()?)?)
        }
        CommandKind::Prokhorov => {
            let x = build_space(&manifest.spaces[0], seed)?;
            let y = build_space(&manifest.spaces[1], seed)?;
            cap("prokhorov", x.len().max(y.len()), MAX_M_DP)?;
            let value = if opts.rn.unwrap_or(false) {
                prokhorov_rn(&coordinate_measure(&x)?, &coordinate_measure(&y)?)?
            } else {
                if x.len() != y.len() || x.distance_rows() != y.distance_rows() {
                    return Err(CliError::Validation(
                        "prokhorov compares two measures on one ground set: the spaces must share their distances \
                         (use `rn` for embedded samples)"
                            .into(),
                    ));
                }
                let mu = MeasureOnCommonSpace::of(&x);
                let nu = MeasureOnCommonSpace::with_grain(&x, y.weights().to_vec(), y.grain())?;
                prokhorov(&mu, &nu)?
            };
            Artifact::report(manifest, serde_json::json!({ "d_p": value }))
        }
        CommandKind::Me => {
            let path = opts.values.as_ref().expect("checked");
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
            let v: MeValues = serde_json::from_str(&text).map_err(|e| {
                CliError::Validation(format!("{} line {} column {}: {e}", path.display(), e.line(), e.column()))
            })?;
            let (weights, grain) = match v.weights {
                Some(w) => (w, None),
                None => (vec![1.0 / v.f.len().max(1) as f64; v.f.len()], Some(v.f.len() as u64)),
            };
            let value = me_distance(&v.f, &v.g, &weights, grain, opts.shift.unwrap_or(false))?;
            Artifact::report(manifest, serde_json::json!({ "me": value }))
        }
        CommandKind::Box => {
            let x = build_space(&manifest.spaces[0], seed)?;
            let y = build_space(&manifest.spaces[1], seed)?;
            cap("box distance", x.len().max(y.len()), 64)?;
            let exact = if x.len() * y.len() <= BOX_TINY_LIMIT { Some(box_exact_tiny(&x, &y)?) } else { None };
            let config = BoxConfig { restarts: opts.restarts.unwrap_or(16), seed, ..BoxConfig::default() };
            let upper = box_upper(&x, &y, config);
            Artifact::report(manifest, BoxResult { exact, upper: upper.value, coupling: upper.coupling.triplets() })
        }
        CommandKind::Measure => {
            let x = build_space(&manifest.spaces[0], seed)?;
            cap("measurement set", x.len(), MAX_M_OBS)?;
            let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
            let set = measurement_set_cached(
                dir.as_deref(),
                &PyramidApprox::Space(x),
                opts.dim.unwrap_or(1),
                opts.radius.unwrap_or(1.0),
                manifest.budget.unwrap_or(8),
                seed,
            )?;
            Artifact::report(manifest, set)
        }
        CommandKind::PyramidRho => {
            let x = build_space(&manifest.spaces[0], seed)?;
            let y = build_space(&manifest.spaces[1], seed)?;
            cap("pyramid metric", x.len().max(y.len()), MAX_M_DP)?;
            let config = RhoConfig { k_max: opts.k_max.unwrap_or(6), budget: manifest.budget.unwrap_or(8), seed };
            let dir = std::env::var_os(CACHE_ENV).map(PathBuf::from);
            let sets = |p: &PyramidApprox, k: usize| {
                measurement_set_cached(dir.as_deref(), p, k, k as f64, config.budget, config.seed)
            };
            let report = pyramid_rho_with(&PyramidApprox::Space(x), &PyramidApprox::Space(y), config, &sets)?;
            Artifact::report(manifest, report)
        }
        CommandKind::Mb => {
            let grid = manifest.n_grid()?;
            let m = manifest.m()?;
            cap("Maxwell-Boltzmann cell", m, MAX_M_DP)?;
            let (k, lambda) = (opts.k.unwrap_or(1), opts.lambda.unwrap_or(1.0));
            if opts.quotient.unwrap_or(false) {
                let rows = mb_convergence_quotient(&grid, k, lambda, m, seed)?;
                let table = rows.iter().map(|r| vec![r.n.to_string(), f(r.sphere), f(r.quotient)]).collect();
                Ok(Artifact::report(manifest, &rows)?.with_table(&["n", "sphere", "quotient"], table, seed))
            } else {
                let rows = mb_convergence(&grid, k, lambda, m, seed)?;
                let table = rows.iter().map(|r| vec![r.n.to_string(), f(r.d_p)]).collect();
                Ok(Artifact::report(manifest, &rows)?.with_table(&["n", "d_p"], table, seed))
            }
        }
        CommandKind::NormalLaw => {
            let x = build_space(&manifest.spaces[0], seed)?;
            let function = opts.function.unwrap_or(ScalarFunction::Distance);
            let values: Vec<f64> = match function {
                ScalarFunction::Distance => (0..x.len()).map(|i| x.dist(i, 0)).collect(),
                ScalarFunction::Coordinate => {
                    let (cloud, scale) = x
                        .embedding()
                        .ok_or_else(|| CliError::Validation("coordinate function needs an embedded space".into()))?;
                    (0..x.len()).map(|i| cloud.point(i)[0] * scale).collect()
                }
            };
            let p = ScalarPushforward::new(values, x.weights().to_vec(), x.grain())?;
            let median = p.values()[p.values().partition_point(|v| p.cdf(*v) < 0.5).min(p.len() - 1)];
            let [lo, hi, step] = opts.grid.unwrap_or([-2.0, 2.0, 0.5]);
            let r = normal_law_rearrangement(&p, &uniform_grid(lo, hi, step))?;
            let identity_error = r.grid.iter().zip(&r.alpha).map(|(x, a)| (a - x - median).abs()).fold(0.0, f64::max);
            let table = r.grid.iter().zip(&r.alpha).map(|(x, a)| vec![f(*x), f(*a)]).collect();
            let result = NormalLawResult { function, median, identity_error, rearrangement: r };
            Ok(Artifact::report(manifest, result)?.with_table(&["x", "alpha"], table, seed))
        }
        CommandKind::Trichotomy => {
            let mut config = TrichotomyConfig::new(
                manifest.radius_law()?,
                manifest.family.unwrap_or(ModelFamily::Sphere),
                manifest.n_grid()?,
                seed,
            );
            if manifest.kappa.is_some() {
                config.kappa = manifest.kappa()?;
            }
            config.m = manifest.m.unwrap_or(config.m);
            cap("trichotomy cell", config.m, MAX_M_ALL_POINTS)?;
            config.budget = manifest.budget.unwrap_or(config.budget);
            config.point_functions = opts.point_functions.or(config.point_functions);
            config.directions = opts.directions.unwrap_or(config.directions);
            config.thresholds = manifest.thresholds.unwrap_or(config.thresholds);
            let report = trichotomy(&config)?;
            let table = report
                .rows
                .iter()
                .map(|r| vec![r.n.to_string(), f(r.radius), f(r.lambda), f(r.obs_diam), f(r.sep_lower), f(r.h1)])
                .collect();
            let header = ["n", "radius", "lambda", "obs_diam", "sep_lower", "h1"];
            Ok(Artifact::report(manifest, &report)?.with_table(&header, table, seed))
        }
        CommandKind::Nonconc => {
            let m = manifest.m()?;
            cap("non-concentration cell", m, MAX_M)?;
            let rows = nonconcentration_constant(&manifest.n_grid()?, m, seed)?;
            let lo = rows.iter().map(|r| r.value).fold(f64::INFINITY, f64::min);
            let hi = rows.iter().map(|r| r.value).fold(f64::NEG_INFINITY, f64::max);
            let table = rows.iter().map(|r| vec![r.n.to_string(), f(r.value)]).collect();
            let result = NonconcResult { limit: nonconcentration_limit(), spread: hi - lo, rows };
            Ok(Artifact::report(manifest, result)?.with_table(&["n", "value"], table, seed))
        }
        CommandKind::CpnBounds => {
            let SpaceSpec::Cpn { n, r, metric, m, seed: s } = &manifest.spaces[0] else { unreachable!("checked") };
            obs_cap(manifest, *m)?;
            let b = cpn_obsdiam_bounds(
                *n,
                r.at(*n)?,
                manifest.kappa()?,
                *m,
                s.unwrap_or(seed),
                *metric,
                opts.tol.unwrap_or(0.15),
            )?;
            let failure = (!b.within).then(|| {
                CliError::Validation(format!(
                    "estimate {} outside [{}, {}] ± tolerance",
                    b.estimate, b.lower_ref, b.upper_ref
                ))
            });
            let mut a = Artifact::report(manifest, b)?;
            a.failure = failure;
            Ok(a)
        }
    }
}
