//! The calibration argument in the reduced quadrant.
//!
//! The unit normal X of the foliation by minimal leaves is divergence free.
//! Gauss–Green on N ∩ Ω and N′ ∩ Ω turns that into the area comparison
//! between the cone and a competitor, with correction terms on the part of
//! ∂Ω where the two sets differ.

mod checks;
mod field;
mod leaf;

pub use checks::{
    boundary_flux, gauss_green_check, minimality_check, sign_band_check, GaussGreenReport,
    MinimalityReport, SignBandReport, SignSample, SIGN_ZERO_TOL,
};
pub use field::{
    divergence_residual, interior_samples, CalibrationField, LeafPoint, RadialField, UnitField,
    DEFAULT_FIELD_TOL, TABLE_EXTENT,
};
pub use leaf::{
    diagonal_distances, integrate_base_leaf, summarize_leaf, Leaf, LeafSummary, LEAF_RADIUS,
    SERIES_START,
};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CalibrationError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error("degenerate point: {0}")]
    Degenerate(String),
    #[error("leaf integration failed: {0}")]
    Integration(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
