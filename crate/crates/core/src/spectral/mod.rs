//! Second variation of the cone in the deformed domain and its radial and
//! angular eigenproblems.
//!
//! The radial problem is solved in two coordinates: the original t ∈ [ε, 1]
//! with weight t⁴, and z = log t after h = t^{5/2}g, where the operator becomes
//! −∂² + 25/4 with the Robin condition ½(K−6)h(0) + h′(0) = 0.

mod angular;
mod closed;
mod radial;
mod sweep;
mod variation;

pub use angular::{angular_eigenvalue, zonal_sphere_spectrum, AngularMode};
pub use closed::{
    compact_analog_eigenvalue, delta1_closed, fit_first_order_coefficient, mu1_closed,
    ESSENTIAL_SPECTRUM_BOTTOM,
};
pub use radial::{
    change_of_variables, inverse_change_of_variables, radial_eigensolve, radial_eigensolve_t,
    radial_eigensolve_z, radial_eigenvalue, radial_energy, radial_rayleigh_quotient,
    richardson_eigenpair, Coordinate, EigenResult, ExtrapolatedEigenpair, OuterBoundary,
    RadialProblem, DEFAULT_DEPTH, DEFAULT_STEP, MAX_STEP,
};
pub use sweep::{
    stability_sweep, stability_threshold, SweepReport, SweepRow, ThresholdReport, STABILITY_MARGIN,
};
pub use variation::{second_variation, SecondVariation};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("grid too coarse: step {step} exceeds {max}")]
    GridTooCoarse { step: f64, max: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}
