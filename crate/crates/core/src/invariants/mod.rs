//! Partial and observable diameters, and separation distance.

mod observable;
mod pushforward;
mod separation;

pub use observable::{obs_diameter, CandidateFamily, FamilyConfig, ObsDiamEstimate, Observable, Provenance};
pub use pushforward::{ordered_separation, partial_diameter, partial_window, ScalarPushforward};
pub use separation::{separation, separation_with, Separation, SeparationConfig};
