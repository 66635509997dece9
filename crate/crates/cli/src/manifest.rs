use std::path::PathBuf;

use mmlimits_core::lab::{ModelFamily, RadiusLaw, Thresholds};
use mmlimits_core::models::{ProjectiveMetric, SphereMetric};
use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Validate,
    Sample,
    Obsdiam,
    Sep,
    Prokhorov,
    Me,
    Box,
    Measure,
    PyramidRho,
    Mb,
    NormalLaw,
    Trichotomy,
    Nonconc,
    CpnBounds,
}

/// A radius given as a number or as a law in `n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Radius {
    Value(f64),
    Law(String),
}

impl Radius {
    pub fn parse(text: &str) -> Radius {
        match text.trim().parse::<f64>() {
            Ok(v) => Radius::Value(v),
            Err(_) => Radius::Law(text.to_string()),
        }
    }

    pub fn at(&self, n: usize) -> Result<f64, CliError> {
        let r = match self {
            Radius::Value(v) => *v,
            Radius::Law(s) => RadiusLaw::parse(s)?.radius(n),
        };
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::Validation(format!("radius must be positive and finite, got {r}")));
        }
        Ok(r)
    }
}

fn default_sphere_metric() -> SphereMetric {
    SphereMetric::Geodesic
}

fn default_projective_metric() -> ProjectiveMetric {
    ProjectiveMetric::FubiniStudy
}

/// A space to build: a sampled model space or a space file. Sampled spaces use the
/// manifest seed unless they carry their own.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SpaceSpec {
    Sphere {
        n: usize,
        r: Radius,
        #[serde(default = "default_sphere_metric")]
        metric: SphereMetric,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Gaussian {
        n: usize,
        lambda: f64,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    Cpn {
        n: usize,
        r: Radius,
        #[serde(default = "default_projective_metric")]
        metric: ProjectiveMetric,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    CpnLift {
        n: usize,
        r: Radius,
        m: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
    },
    File {
        path: PathBuf,
    },
}

impl SpaceSpec {
    /// Sample size, when the space is sampled.
    pub fn m(&self) -> Option<usize> {
        match self {
            SpaceSpec::Sphere { m, .. }
            | SpaceSpec::Gaussian { m, .. }
            | SpaceSpec::Cpn { m, .. }
            | SpaceSpec::CpnLift { m, .. } => Some(*m),
            SpaceSpec::File { .. } => None,
        }
    }
}

/// One value or a list (`kappa: 0.1` or `kappa: [0.1, 0.2]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPaths {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarFunction {
    /// Distance to the first sample point.
    Distance,
    /// First embedded coordinate.
    Coordinate,
}

/// Command-specific settings; each command reads the ones it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Projection dimension (`mb`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Truncation level (`pyramid-rho`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// Hopf-quotient variant (`mb`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quotient: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub function: Option<ScalarFunction>,
    /// Rearrangement grid `[lo, hi, step]` (`normal-law`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<[f64; 3]>,
    /// Optimize over constant shifts (`me`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    /// Measurement dimension `N`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Measurement truncation radius `R`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point_functions: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub directions: Option<usize>,
    /// `{f, g, weights?}` value file (`me`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<PathBuf>,
    /// Compare embedded coordinates as measures on `(R^N, ℓ∞)` (`prokhorov`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rn: Option<bool>,
}

/// Everything one run needs. Command-line invocations are translated into a manifest,
/// so both routes execute identically.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentManifest {
    pub command: CommandKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub spaces: Vec<SpaceSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_law: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<ModelFamily>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<OneOrMany>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputPaths>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thresholds: Option<Thresholds>,
    #[serde(default)]
    pub options: Options,
}

impl ExperimentManifest {
    pub fn new(command: CommandKind, seed: u64) -> Self {
        ExperimentManifest {
            command,
            spaces: Vec::new(),
            n_grid: None,
            radius_law: None,
            family: None,
            kappa: None,
            m: None,
            budget: None,
            seed,
            output: None,
            thresholds: None,
            options: Options::default(),
        }
    }

    /// Parse and check a manifest; errors name the line, column and field at fault.
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let manifest: ExperimentManifest = serde_json::from_str(text)
            .map_err(|e| CliError::Validation(format!("manifest line {} column {}: {e}", e.line(), e.column())))?;
        manifest.check()?;
        Ok(manifest)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    fn need<T: Clone>(value: &Option<T>, field: &str, command: CommandKind) -> Result<T, CliError> {
        value.clone().ok_or_else(|| CliError::Validation(format!("field `{field}` is required for {command:?}")))
    }

    pub fn n_grid(&self) -> Result<Vec<usize>, CliError> {
        Self::need(&self.n_grid, "n_grid", self.command)?.values().map_err(CliError::Validation)
    }

    pub fn m(&self) -> Result<usize, CliError> {
        Self::need(&self.m, "m", self.command)
    }

    pub fn kappas(&self) -> Result<Vec<f64>, CliError> {
        let k = Self::need(&self.kappa, "kappa", self.command)?.values();
        if k.is_empty() || k.iter().any(|v| !(*v > 0.0 && *v < 1.0)) {
            return Err(CliError::Validation(format!("field `kappa`: values must lie in (0, 1), got {k:?}")));
        }
        Ok(k)
    }

    pub fn kappa(&self) -> Result<f64, CliError> {
        let k = self.kappas()?;
        if k.len() != 1 {
            return Err(CliError::Validation(format!("field `kappa`: expected one value for {:?}", self.command)));
        }
        Ok(k[0])
    }

    pub fn radius_law(&self) -> Result<RadiusLaw, CliError> {
        Ok(RadiusLaw::parse(&Self::need(&self.radius_law, "radius_law", self.command)?)?)
    }

    pub fn space_count(&self, expected: usize) -> Result<(), CliError> {
        if self.spaces.len() != expected {
            return Err(CliError::Validation(format!(
                "field `spaces`: {:?} takes {expected} space(s), got {}",
                self.command,
                self.spaces.len()
            )));
        }
        Ok(())
    }

    /// Structural checks that do not need any computation.
    pub fn check(&self) -> Result<(), CliError> {
        use CommandKind::*;
        match self.command {
            Validate | Sample | Obsdiam | Sep | Measure => self.space_count(1)?,
            Prokhorov | Box | PyramidRho => self.space_count(2)?,
            Me => {
                Self::need(&self.options.values, "options.values", self.command)?;
            }
            Mb | Nonconc => {
                self.n_grid()?;
                self.m()?;
            }
            Trichotomy => {
                self.n_grid()?;
                self.radius_law()?;
            }
            NormalLaw => self.space_count(1)?,
            CpnBounds => {
                self.space_count(1)?;
                if !matches!(self.spaces[0], SpaceSpec::Cpn { .. }) {
                    return Err(CliError::Validation("field `spaces`: cpn-bounds needs a `cpn` space".into()));
                }
            }
        }
        if matches!(self.command, Obsdiam | CpnBounds) {
            self.kappa()?;
        }
        if self.command == Sep {
            self.kappas()?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_diagnostics() {
        let text = r#"{
            "command": "trichotomy",
            "n_grid": "25:200",
            "radius_law": "n^1.0",
            "family": "sphere",
            "seed": 7
        }"#;
        let m = ExperimentManifest::from_json(text).unwrap();
        assert_eq!(m.n_grid().unwrap(), vec![25, 50, 100, 200]);
        assert_eq!(ExperimentManifest::from_json(&m.to_json()).unwrap(), m);

        let unknown = r#"{"command": "mb", "n_grid": [5], "m": 10,
  "lambda": 1}"#;
        let e = ExperimentManifest::from_json(unknown).unwrap_err().to_string();
        assert!(e.contains("line 2") && e.contains("lambda"), "{e}");
        let missing = r#"{"command": "obsdiam", "spaces": [{"kind": "sphere", "n": 3, "r": "sqrt_n", "m": 10}]}"#;
        assert!(ExperimentManifest::from_json(missing).unwrap_err().to_string().contains("kappa"));
    }

    #[test]
    fn radius_forms() {
        assert_eq!(Radius::parse("2.5").at(9).unwrap(), 2.5);
        assert_eq!(Radius::parse("sqrt_n").at(9).unwrap(), 3.0);
        assert!(Radius::parse("-1").at(9).is_err());
        assert!(Radius::parse("n^x").at(9).is_err());
    }
}
