//! Measurements: pushforwards into `(R^N, ℓ∞)` under 1-Lipschitz maps, and the pyramid
//! metric estimated from them.

mod cache;
mod measure;
mod rho;
mod set;

pub use cache::{cache_key, measurement_set_cached};
pub use measure::{clamp_projection, MeasureOnRN};
pub use rho::{pyramid_rho, pyramid_rho_with, rho_tail, RhoConfig, RhoReport, RhoTerm};
pub use set::{measurement_set, MeasurementSet, MemberKind, PyramidApprox};
