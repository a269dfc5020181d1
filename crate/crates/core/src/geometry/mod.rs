//! O(4)×O(4)-reduced geometry in the (u, v) = (|x′|, |x″|) quadrant.
//!
//! The Simons cone is the diagonal u = v, the unit ball is the quarter disk
//! and the deformed domain Ω is the polar region r ≤ 1 + K·φ(d(θ)).
//! Areas and volumes carry the density u³v³ and the factor (2π²)².

mod competitor;
mod curve;
mod domain;

pub use competitor::{
    arc_angles, cone_curve, enclosed_region, endpoint_angle, make_competitor, trace_curve,
    Perturbation, PerturbationTerm, ARC_SEGMENTS, DEFAULT_CURVE_VERTICES,
};
pub use curve::{mirror, weighted_area, weighted_volume, GeneratingCurve, ReducedRegion, Side};
pub use domain::{
    boundary_normal, boundary_point, boundary_radius, boundary_radius_derivative, boundary_speed,
    bump, bump_derivative, cross_section_distance, AngularCoordinate, CutoffProfile, DomainParams,
};

use thiserror::Error;

use crate::numerics::NumericsError;

pub type Point = nalgebra::Vector2<f64>;

/// Squared volume of the unit 3-sphere.
pub const ORBIT_FACTOR: f64 =
    4.0 * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("constraint violated: {0}")]
    Constraint(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
