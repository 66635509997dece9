use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::mb::cell_seed;
use crate::distances::hausdorff_measures;
use crate::error::{MmError, Result};
use crate::invariants::{obs_diameter, ordered_separation, CandidateFamily, FamilyConfig, ScalarPushforward};
use crate::measurements::{measurement_set, PyramidApprox};
use crate::mm::{FiniteMMSpace, PointMap};
use crate::models::{
    project, sample_cpn, sample_gaussian, sample_sphere, GaussianSpec, Projection, ProjectiveMetric, ProjectiveSpec,
    SphereMetric, SphereSpec,
};

/// Radius sequences `r_n`: `c·n^p`, `√n`, `√(2n+1)` or a constant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum RadiusLaw {
    Power { c: f64, p: f64 },
    SqrtN,
    Sqrt2nPlus1,
    Const { c: f64 },
}

fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    let s = s.strip_prefix('(').and_then(|s| s.strip_suffix(')')).unwrap_or(s);
    let v = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?,
        None => s.parse::<f64>().ok()?,
    };
    v.is_finite().then_some(v)
}

impl RadiusLaw {
    /// Accepts `c * n^p` (either factor optional, `p` possibly a fraction `a/b`), `sqrt_n`,
    /// `sqrt_2n_plus_1` and `const c`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let bad = || {
            MmError::arg(format!("radius law {text:?}: expected `c * n^p`, `sqrt_n`, `sqrt_2n_plus_1` or `const c`"))
        };
        let law = match t {
            "sqrt_n" => RadiusLaw::SqrtN,
            "sqrt_2n_plus_1" => RadiusLaw::Sqrt2nPlus1,
            _ if t.starts_with("const") => RadiusLaw::Const { c: parse_number(&t[5..]).ok_or_else(bad)? },
            _ => {
                let (c, rest) = match t.split_once('*') {
                    Some((c, rest)) => (parse_number(c).ok_or_else(bad)?, rest.trim()),
                    None => (1.0, t),
                };
                let p = match rest {
                    "n" => 1.0,
                    _ => parse_number(rest.strip_prefix("n^").ok_or_else(bad)?).ok_or_else(bad)?,
                };
                RadiusLaw::Power { c, p }
            }
        };
        let positive = match law {
            RadiusLaw::Power { c, .. } | RadiusLaw::Const { c } => c > 0.0,
            _ => true,
        };
        if !positive {
            return Err(MmError::arg(format!("radius law {text:?} must be positive")));
        }
        Ok(law)
    }

    pub fn radius(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            RadiusLaw::Power { c, p } => c * n.powf(p),
            RadiusLaw::SqrtN => n.sqrt(),
            RadiusLaw::Sqrt2nPlus1 => (2.0 * n + 1.0).sqrt(),
            RadiusLaw::Const { c } => c,
        }
    }
}

impl fmt::Display for RadiusLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusLaw::Power { c, p } => write!(f, "{c} * n^{p}"),
            RadiusLaw::SqrtN => write!(f, "sqrt_n"),
            RadiusLaw::Sqrt2nPlus1 => write!(f, "sqrt_2n_plus_1"),
            RadiusLaw::Const { c } => write!(f, "const {c}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    Sphere,
    Cpn,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Levy,
    Dissipate,
    Converge,
    Inconclusive,
}

/// Decision constants. Trends are least-squares slopes of `ln(statistic)` against `ln n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    /// Slope magnitude separating a trend from a plateau.
    pub slope: f64,
    /// Largest final measurement distance to the Gaussian reference for convergence.
    pub converge_h1: f64,
    /// Noise allowance when checking that the measurement distance does not grow.
    pub h1_band: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { slope: 0.08, converge_h1: 0.08, h1_band: 0.01 }
    }
}

#[derive(Clone, Debug)]
pub struct TrichotomyConfig {
    pub law: RadiusLaw,
    pub family: ModelFamily,
    pub n_grid: Vec<usize>,
    pub kappa: f64,
    pub m: usize,
    pub seed: u64,
    /// Distance-to-point members of the observable family (`None`: all).
    pub point_functions: Option<usize>,
    pub directions: usize,
    /// Measurements per space for the Gaussian comparison.
    pub budget: usize,
    /// Real dimension of the largest Gaussian reference space.
    pub gaussian_dims: usize,
    pub thresholds: Thresholds,
}

impl TrichotomyConfig {
    pub fn new(law: RadiusLaw, family: ModelFamily, n_grid: Vec<usize>, seed: u64) -> Self {
        TrichotomyConfig {
            law,
            family,
            n_grid,
            kappa: 0.1,
            m: 2000,
            seed,
            point_functions: Some(256),
            directions: 64,
            budget: 8,
            gaussian_dims: 4,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrichotomyRow {
    pub n: usize,
    pub radius: f64,
    pub lambda: f64,
    pub obs_diam: f64,
    /// Best separation `Sep(κ, κ)` of a one-dimensional image; a lower bound.
    pub sep_lower: f64,
    /// Hausdorff distance between level-1 measurement sets of the sample and of the
    /// Gaussian reference with the same `λ`.
    pub h1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrichotomyReport {
    pub family: ModelFamily,
    pub law: String,
    pub kappa: f64,
    pub m: usize,
    pub seed: u64,
    pub rows: Vec<TrichotomyRow>,
    pub slope_obs_diam: f64,
    pub slope_sep: f64,
    pub thresholds: Thresholds,
    pub verdict: Verdict,
}

/// Least-squares slope of `ln y` against `ln x`; NaN when some `y ≤ 0`.
pub fn log_slope(x: &[f64], y: &[f64]) -> f64 {
    if x.len() < 2 || y.iter().any(|v| !(*v > 0.0)) {
        return f64::NAN;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Deterministic classification from the per-`n` statistics.
pub fn classify(rows: &[TrichotomyRow], t: &Thresholds) -> (f64, f64, Verdict) {
    let n: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let so = log_slope(&n, &rows.iter().map(|r| r.obs_diam).collect::<Vec<_>>());
    let ss = log_slope(&n, &rows.iter().map(|r| r.sep_lower).collect::<Vec<_>>());
    let verdict = if so < -t.slope {
        Verdict::Levy
    } else if ss > t.slope {
        Verdict::Dissipate
    } else if so.abs() <= t.slope && ss.abs() <= t.slope && !rows.is_empty() && {
        let (first, last) = (rows[0].h1, rows[rows.len() - 1].h1);
        last <= t.converge_h1 && last <= first + t.h1_band
    } {
        Verdict::Converge
    } else {
        Verdict::Inconclusive
    };
    (so, ss, verdict)
}

/// Projections of `x` to its first `1..=k` (real or complex) coordinates, as a chain.
fn projection_chain(x: &FiniteMMSpace, k: usize, hopf: bool) -> Result<PyramidApprox> {
    let spaces = (1..=k)
        .map(|j| {
            let p = if hopf { Projection::HopfCoordinate(j) } else { Projection::Coordinate(j) };
            Ok(project(x, p, 1e-9)?.space)
        })
        .collect::<Result<Vec<_>>>()?;
    let links: Vec<PointMap> = (1..k).map(|_| PointMap::identity(x.len())).collect();
    PyramidApprox::chain(spaces, &links, 1e-9)
}

fn cell(config: &TrichotomyConfig, n: usize, gauss: &FiniteMMSpace) -> Result<TrichotomyRow> {
    let radius = config.law.radius(n);
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(MmError::arg(format!("radius law gives r_{n} = {radius}")));
    }
    let (x, lambda, hopf, k) = match config.family {
        ModelFamily::Sphere => {
            let spec = SphereSpec {
                n,
                r: radius,
                metric: SphereMetric::Geodesic,
                m: config.m,
                seed: cell_seed(config.seed, 6, n),
            };
            (sample_sphere(spec)?, radius / (n as f64).sqrt(), false, config.gaussian_dims.min(n + 1))
        }
        ModelFamily::Cpn => {
            let spec = ProjectiveSpec {
                n,
                r: radius,
                metric: ProjectiveMetric::FubiniStudy,
                m: config.m,
                seed: cell_seed(config.seed, 7, n),
            };
            (
                sample_cpn(spec)?,
                radius / ((2 * n + 1) as f64).sqrt(),
                true,
                (config.gaussian_dims / 2).max(1).min(n + 1),
            )
        }
    };
    let family = CandidateFamily::default_for(
        &x,
        FamilyConfig { directions: config.directions, point_functions: config.point_functions, seed: config.seed },
    );
    let obs = obs_diameter(&x, config.kappa, &family)?;
    let seps: Vec<f64> = family
        .members()
        .par_iter()
        .map(|(f, _)| {
            let p = ScalarPushforward::new(f.evaluate(&x)?, x.weights().to_vec(), x.grain())?;
            Ok(ordered_separation(&p, config.kappa, config.kappa))
        })
        .collect::<Result<_>>()?;
    let sep_lower = seps.into_iter().fold(0.0, f64::max);
    // the Gaussian side: projections of one standard sample, scaled to λ
    let reference = projection_chain(&gauss.scaled(lambda)?, k, hopf)?;
    let own = projection_chain(&x, k, hopf)?;
    let a = measurement_set(&own, 1, 1.0, config.budget, config.seed)?;
    let b = measurement_set(&reference, 1, 1.0, config.budget, config.seed)?;
    let h1 = hausdorff_measures(&a.members, &b.members)?;
    Ok(TrichotomyRow { n, radius, lambda, obs_diam: obs.value, sep_lower, h1 })
}

/// Per-`n` statistics for `S^n(r_n)` or `CP^n(r_n)` and the regime they indicate.
pub fn trichotomy(config: &TrichotomyConfig) -> Result<TrichotomyReport> {
    if config.n_grid.len() < 2 {
        return Err(MmError::arg("the grid needs at least two dimensions"));
    }
    if !(config.kappa > 0.0 && config.kappa < 0.5) {
        return Err(MmError::arg("κ must lie in (0, ½)"));
    }
    let dims = match config.family {
        ModelFamily::Sphere => config.gaussian_dims,
        ModelFamily::Cpn => 2 * (config.gaussian_dims / 2).max(1),
    };
    let gauss =
        sample_gaussian(GaussianSpec { n: dims, lambda: 1.0, m: config.m, seed: cell_seed(config.seed, 8, 0) })?;
    let rows: Vec<TrichotomyRow> = config.n_grid.iter().map(|&n| cell(config, n, &gauss)).collect::<Result<_>>()?;
    let (slope_obs_diam, slope_sep, verdict) = classify(&rows, &config.thresholds);
    Ok(TrichotomyReport {
        family: config.family,
        law: config.law.to_string(),
        kappa: config.kappa,
        m: config.m,
        seed: config.seed,
        rows,
        slope_obs_diam,
        slope_sep,
        thresholds: config.thresholds,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radius_law_grammar() {
        assert_eq!(RadiusLaw::parse("n^1.0").unwrap(), RadiusLaw::Power { c: 1.0, p: 1.0 });
        assert_eq!(RadiusLaw::parse("2 * n^1/3").unwrap(), RadiusLaw::Power { c: 2.0, p: 1.0 / 3.0 });
        assert_eq!(RadiusLaw::parse("sqrt_n").unwrap(), RadiusLaw::SqrtN);
        assert_eq!(RadiusLaw::parse("const 2.5").unwrap(), RadiusLaw::Const { c: 2.5 });
        assert_eq!(RadiusLaw::parse("3*n").unwrap(), RadiusLaw::Power { c: 3.0, p: 1.0 });
        for bad in ["", "n^x", "log n", "const", "-1 * n^2", "sqrt"] {
            assert!(RadiusLaw::parse(bad).is_err(), "{bad}");
        }
        assert_eq!(RadiusLaw::SqrtN.radius(16), 4.0);
        assert_eq!(RadiusLaw::Sqrt2nPlus1.radius(4), 3.0);
        let law = RadiusLaw::parse("0.5 * n^0.25").unwrap();
        assert_eq!(RadiusLaw::parse(&law.to_string()).unwrap(), law);
    }

    #[test]
    fn slopes() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.25)).collect();
        assert!((log_slope(&x, &y) + 0.25).abs() < 1e-12);
        assert!(log_slope(&x, &[1.0, 0.0, 1.0, 1.0]).is_nan());
    }

    #[test]
    fn classification_rules() {
        let row = |n: usize, o: f64, s: f64, h: f64| TrichotomyRow {
            n,
            radius: 1.0,
            lambda: 1.0,
            obs_diam: o,
            sep_lower: s,
            h1: h,
        };
        let t = Thresholds::default();
        let levy = [row(25, 2.0, 2.0, 0.1), row(200, 1.2, 1.2, 0.1)];
        assert_eq!(classify(&levy, &t).2, Verdict::Levy);
        let diss = [row(25, 2.0, 2.0, 0.1), row(200, 6.0, 6.0, 0.1)];
        assert_eq!(classify(&diss, &t).2, Verdict::Dissipate);
        let conv = [row(25, 3.3, 3.4, 0.06), row(200, 3.3, 3.4, 0.03)];
        assert_eq!(classify(&conv, &t).2, Verdict::Converge);
        let far = [row(25, 3.3, 3.4, 0.3), row(200, 3.3, 3.4, 0.3)];
        assert_eq!(classify(&far, &t).2, Verdict::Inconclusive);
    }
}
