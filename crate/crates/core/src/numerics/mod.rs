//! Deterministic numerical kernels shared by the geometry, spectral and
//! calibration modules.
//!
//! - [`TridiagonalSystem`] with Sturm-sequence bisection and inverse iteration
//! - [`find_root`], a Brent bracketing solver
//! - [`integrate_ode`], an adaptive Dormand–Prince 5(4) integrator with
//!   event location through a stop predicate
//! - [`integrate_samples`] and [`derivative_samples`] on uniform grids
//!
//! Every routine is a pure function of its inputs.

mod ode;
mod quadrature;
mod roots;
mod tridiagonal;

pub use ode::{
    dopri_step, integrate_ode, integrate_ode_with, OdeOptions, OdeState, DEFAULT_ODE_TOL,
};
pub use quadrature::{derivative_samples, gauss_legendre_4, integrate_samples};
pub use roots::{find_root, Bracket, DEFAULT_ROOT_TOL};
pub use tridiagonal::{
    eigenpair, eigenvalue, lowest_eigenvalues, smallest_eigenpair, Eigenpair, TridiagonalSystem,
    DEFAULT_EIGEN_RESIDUAL,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo:e}, f(hi) = {f_hi:e}")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },
    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },
    #[error("step size underflow at t = {}: last good state {:?}", .last.t, .last.y)]
    Singularity { last: Box<OdeState> },
}
