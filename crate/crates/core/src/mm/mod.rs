//! Finite mm-spaces, maps between them and group quotients.

mod map;
mod space;

pub(crate) use map::worst_excess;
pub use map::{
    certify_lipschitz_function, certify_lipschitz_order, pushforward, pushforward_rn, pushforward_weights,
    quotient_space, Coupling, OrderCertificate, PointMap,
};
pub(crate) use space::{default_labels, hermitian_parts};
pub use space::{
    point_distance, validate_parts, DistanceMatrix, EmbeddedMetric, FiniteMMSpace, Metric, PointCloud, SpaceFile,
    ValidationReport, Violation, MASS_TOL, METRIC_TOL,
};
