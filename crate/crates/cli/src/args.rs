use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use mmlimits_core::lab::ModelFamily;
use mmlimits_core::models::{ProjectiveMetric, SphereMetric};

use crate::grid::Grid;
use crate::manifest::{CommandKind, ExperimentManifest, OneOrMany, OutputPaths, Radius, ScalarFunction, SpaceSpec};
use crate::CliError;

#[derive(Parser, Debug)]
#[command(name = "mmlimits", version = crate::VERSION, about = "Metric-measure limits of spheres and projective spaces")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SpaceKind {
    Sphere,
    Gaussian,
    Cpn,
    CpnLift,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MetricArg {
    Geodesic,
    Chordal,
    FubiniStudy,
    ChordalQuotient,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Sphere,
    Cpn,
}

/// A sampled model space, or `--input` for a space file.
#[derive(Args, Debug, Clone)]
pub struct SpaceArgs {
    #[arg(long, conflicts_with = "space")]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub space: Option<SpaceKind>,
    /// Dimension (complex dimension for `cpn`).
    #[arg(long)]
    pub n: Option<usize>,
    /// Radius: a number or a law in n (`sqrt_n`, `c * n^p`, ...).
    #[arg(long)]
    pub r: Option<String>,
    /// Gaussian scale.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, value_enum)]
    pub metric: Option<MetricArg>,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// JSON report path (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV table path, for commands that emit a table.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a space file's invariants.
    Validate {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Sample a model space and write it as a space file.
    Sample {
        #[command(flatten)]
        space: SpaceArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Observable-diameter estimate.
    Obsdiam {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        kappa: f64,
        /// Seeded subset of distance functions (default: all).
        #[arg(long)]
        point_functions: Option<usize>,
        #[arg(long)]
        directions: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Separation distance.
    Sep {
        #[command(flatten)]
        space: SpaceArgs,
        /// Comma-separated κ values.
        #[arg(long, value_delimiter = ',', required = true)]
        kappa: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Prokhorov distance between two measures on one ground set.
    Prokhorov {
        a: PathBuf,
        b: PathBuf,
        /// Compare embedded coordinates on (R^N, ℓ∞).
        #[arg(long)]
        rn: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Ky Fan metric between two functions given as `{f, g, weights?}`.
    Me {
        values: PathBuf,
        /// Distance modulo constants.
        #[arg(long)]
        shift: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Box distance: exact for tiny spaces, plus a local-search upper bound.
    Box {
        a: PathBuf,
        b: PathBuf,
        #[arg(long)]
        restarts: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Measurement set M(X; N, R).
    Measure {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long = "dim", default_value_t = 1)]
        dim: usize,
        #[arg(long = "radius", default_value_t = 1.0)]
        radius: f64,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Truncated pyramid-metric estimate between two space files.
    PyramidRho {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 6)]
        k_max: usize,
        #[arg(long, default_value_t = 8)]
        budget: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Prokhorov distance of sphere projections to the Gaussian, over a grid of n.
    Mb {
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long)]
        m: usize,
        /// Hopf-quotient variant alongside the sphere values.
        #[arg(long)]
        quotient: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Monotone rearrangement of γ¹ onto a 1-Lipschitz pushforward.
    NormalLaw {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_enum, default_value = "distance")]
        function: ScalarFunction,
        /// `lo:hi:step`.
        #[arg(long, default_value = "-2:2:0.5")]
        x_grid: String,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a radius law as Lévy, dissipating or convergent.
    Trichotomy {
        #[arg(long, value_enum, default_value = "sphere")]
        family: FamilyArg,
        #[arg(long)]
        radius_law: String,
        #[arg(long)]
        grid: String,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        budget: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Ky Fan distance between coordinate classes of Gaussian samples.
    Nonconc {
        #[arg(long)]
        grid: String,
        #[arg(long)]
        m: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Observable diameter of CP^n(r) against its limit bracket.
    CpnBounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: String,
        #[arg(long)]
        kappa: f64,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "fubini-study")]
        metric: MetricArg,
        #[arg(long)]
        tol: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Execute a JSON experiment manifest.
    Run { manifest: PathBuf },
}

fn sphere_metric(m: Option<MetricArg>) -> Result<SphereMetric, CliError> {
    match m {
        None | Some(MetricArg::Geodesic) => Ok(SphereMetric::Geodesic),
        Some(MetricArg::Chordal) => Ok(SphereMetric::Chordal),
        Some(other) => Err(CliError::Validation(format!("metric {other:?} does not apply to spheres"))),
    }
}

fn projective_metric(m: Option<MetricArg>) -> Result<ProjectiveMetric, CliError> {
    match m {
        None | Some(MetricArg::FubiniStudy) => Ok(ProjectiveMetric::FubiniStudy),
        Some(MetricArg::ChordalQuotient) => Ok(ProjectiveMetric::ChordalQuotient),
        Some(other) => Err(CliError::Validation(format!("metric {other:?} does not apply to projective spaces"))),
    }
}

impl SpaceArgs {
    pub fn spec(&self) -> Result<SpaceSpec, CliError> {
        if let Some(path) = &self.input {
            return Ok(SpaceSpec::File { path: path.to_path_buf() });
        }
        let missing = |flag: &str| CliError::Validation(format!("--{flag} is required for a sampled space"));
        let kind = self.space.ok_or_else(|| missing("space (or --input)"))?;
        let n = self.n.ok_or_else(|| missing("n"))?;
        let m = self.m.ok_or_else(|| missing("m"))?;
        let r = || self.r.as_deref().map(Radius::parse).ok_or_else(|| missing("r"));
        Ok(match kind {
            SpaceKind::Sphere => SpaceSpec::Sphere { n, r: r()?, metric: sphere_metric(self.metric)?, m, seed: None },
            SpaceKind::Gaussian => {
                SpaceSpec::Gaussian { n, lambda: self.lambda.ok_or_else(|| missing("lambda"))?, m, seed: None }
            }
            SpaceKind::Cpn => SpaceSpec::Cpn { n, r: r()?, metric: projective_metric(self.metric)?, m, seed: None },
            SpaceKind::CpnLift => SpaceSpec::CpnLift { n, r: r()?, m, seed: None },
        })
    }
}

fn file(path: &Path) -> SpaceSpec {
    SpaceSpec::File { path: path.to_path_buf() }
}

fn parse_range(text: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<f64> = text
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| CliError::Validation(format!("--x-grid {text:?}: expected lo:hi:step")))?;
    match parts[..] {
        [lo, hi, step] if lo < hi && step > 0.0 => Ok([lo, hi, step]),
        _ => Err(CliError::Validation(format!("--x-grid {text:?}: expected lo < hi and step > 0"))),
    }
}

impl Command {
    /// The manifest this invocation stands for; `None` for `run`, whose manifest is on disk.
    pub fn manifest(&self) -> Result<Option<ExperimentManifest>, CliError> {
        let with = |kind: CommandKind, common: &Common| {
            let mut m = ExperimentManifest::new(kind, common.seed);
            if common.out.is_some() || common.csv.is_some() {
                m.output = Some(OutputPaths { json: common.out.clone(), csv: common.csv.clone() });
            }
            m
        };
        let m = match self {
            Command::Validate { file: path, common } => {
                let mut m = with(CommandKind::Validate, common);
                m.spaces = vec![file(path)];
                m
            }
            Command::Sample { space, common } => {
                let mut m = with(CommandKind::Sample, common);
                m.spaces = vec![space.spec()?];
                m
            }
            Command::Obsdiam { space, kappa, point_functions, directions, common } => {
                let mut m = with(CommandKind::Obsdiam, common);
                m.spaces = vec![space.spec()?];
                m.kappa = Some(OneOrMany::One(*kappa));
                m.options.point_functions = *point_functions;
                m.options.directions = *directions;
                m
            }
            Command::Sep { space, kappa, common } => {
                let mut m = with(CommandKind::Sep, common);
                m.spaces = vec![space.spec()?];
                m.kappa = Some(OneOrMany::Many(kappa.clone()));
                m
            }
            Command::Prokhorov { a, b, rn, common } => {
                let mut m = with(CommandKind::Prokhorov, common);
                m.spaces = vec![file(a), file(b)];
                m.options.rn = rn.then_some(true);
                m
            }
            Command::Me { values, shift, common } => {
                let mut m = with(CommandKind::Me, common);
                m.options.values = Some(values.clone());
                m.options.shift = shift.then_some(true);
                m
            }
            Command::Box { a, b, restarts, common } => {
                let mut m = with(CommandKind::Box, common);
                m.spaces = vec![file(a), file(b)];
                m.options.restarts = *restarts;
                m
            }
            Command::Measure { space, dim, radius, budget, common } => {
                let mut m = with(CommandKind::Measure, common);
                m.spaces = vec![space.spec()?];
                m.options.dim = Some(*dim);
                m.options.radius = Some(*radius);
                m.budget = Some(*budget);
                m
            }
            Command::PyramidRho { a, b, k_max, budget, common } => {
                let mut m = with(CommandKind::PyramidRho, common);
                m.spaces = vec![file(a), file(b)];
                m.options.k_max = Some(*k_max);
                m.budget = Some(*budget);
                m
            }
            Command::Mb { grid, k, lambda, m: size, quotient, common } => {
                let mut m = with(CommandKind::Mb, common);
                m.n_grid = Some(Grid::Text(grid.clone()));
                m.m = Some(*size);
                m.options.k = Some(*k);
                m.options.lambda = Some(*lambda);
                m.options.quotient = quotient.then_some(true);
                m
            }
            Command::NormalLaw { space, function, x_grid, common } => {
                let mut m = with(CommandKind::NormalLaw, common);
                m.spaces = vec![space.spec()?];
                m.options.function = Some(*function);
                m.options.grid = Some(parse_range(x_grid)?);
                m
            }
            Command::Trichotomy { family, radius_law, grid, kappa, m: size, budget, common } => {
                let mut m = with(CommandKind::Trichotomy, common);
                m.family = Some(match family {
                    FamilyArg::Sphere => ModelFamily::Sphere,
                    FamilyArg::Cpn => ModelFamily::Cpn,
                });
                m.radius_law = Some(radius_law.clone());
                m.n_grid = Some(Grid::Text(grid.clone()));
                m.kappa = kappa.map(OneOrMany::One);
                m.m = *size;
                m.budget = *budget;
                m
            }
            Command::Nonconc { grid, m: size, common } => {
                let mut m = with(CommandKind::Nonconc, common);
                m.n_grid = Some(Grid::Text(grid.clone()));
                m.m = Some(*size);
                m
            }
            Command::CpnBounds { n, r, kappa, m: size, metric, tol, common } => {
                let mut m = with(CommandKind::CpnBounds, common);
                m.spaces = vec![SpaceSpec::Cpn {
                    n: *n,
                    r: Radius::parse(r),
                    metric: projective_metric(Some(*metric))?,
                    m: *size,
                    seed: None,
                }];
                m.kappa = Some(OneOrMany::One(*kappa));
                m.options.tol = *tol;
                m
            }
            Command::Run { .. } => return Ok(None),
        };
        m.check()?;
        Ok(Some(m))
    }
}
