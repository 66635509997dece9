//! Samplers and closed forms for spheres, Gaussian spaces and complex projective spaces.

mod closed_form;
mod projection;
mod samplers;

pub use closed_form::{
    gaussian_annulus_mass, gaussian_obs_diameter, rayleigh_min_window, spherical_cap_mass, std_normal_interval,
    std_normal_interval_inv,
};
pub use projection::{project, radial_truncation, Projected, Projection};
pub use samplers::{
    sample_cpn, sample_cpn_lift, sample_gaussian, sample_sphere, GaussianSpec, ProjectiveMetric, ProjectiveSpec,
    SphereMetric, SphereSpec,
};
