//! Experiments: Maxwell–Boltzmann convergence, the normal law, the limit trichotomy for
//! spheres and projective spaces, and supporting checks.

mod cpn;
mod isoperimetry;
mod mb;
mod nonconc;
mod normal;
mod scaling;
mod trichotomy;

pub use cpn::{cpn_obsdiam_bounds, CpnBounds};
pub use isoperimetry::{levy_isoperimetry_check, IsoRow};
pub use mb::{mb_convergence, mb_convergence_quotient, MbQuotientRow, MbRow};
pub use nonconc::{coordinate_pair_distance, nonconcentration_constant, nonconcentration_limit, NonconcRow};
pub use normal::{normal_law_rearrangement, uniform_grid, Rearrangement};
pub use scaling::{dissipation_scaling, ScalingCheck};
pub use trichotomy::{
    classify, log_slope, trichotomy, ModelFamily, RadiusLaw, Thresholds, TrichotomyConfig, TrichotomyReport,
    TrichotomyRow, Verdict,
};
