use rayon::prelude::*;
use serde::Serialize;

use super::{
    delta1_closed, mu1_closed, radial_eigensolve, Coordinate, RadialProblem, SpectralError,
};
use crate::numerics::{find_root, Bracket};

/// μ₁ must exceed this margin for a finite-difference row to count as
/// strictly stable; it absorbs the O(step²) discretization error at K = 5.
pub const STABILITY_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub delta1_closed: f64,
    pub mu1_closed: f64,
    pub delta1_fd: Option<f64>,
    pub mu1_fd: Option<f64>,
    /// μ₁_FD > margin.
    pub stable: Option<bool>,
    /// μ₁ closed form > 0.
    pub stable_closed: bool,
    pub discrepancy: Option<f64>,
    pub residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub depth: f64,
    pub step: f64,
    pub coordinate: Coordinate,
    pub margin: f64,
    pub max_discrepancy: f64,
    pub max_residual: f64,
}

fn row(k: f64, template: &RadialProblem) -> SweepRow {
    let mut row = SweepRow {
        k,
        delta1_closed: delta1_closed(k),
        mu1_closed: mu1_closed(k),
        delta1_fd: None,
        mu1_fd: None,
        stable: None,
        stable_closed: mu1_closed(k) > 0.0,
        discrepancy: None,
        residual: None,
        error: None,
    };
    match template.with_k(k).and_then(|p| radial_eigensolve(&p)) {
        Ok(result) => {
            let mu = result.eigenvalue - 6.0;
            row.delta1_fd = Some(result.eigenvalue);
            row.mu1_fd = Some(mu);
            row.stable = Some(mu > STABILITY_MARGIN);
            row.discrepancy = Some((result.eigenvalue - row.delta1_closed).abs());
            row.residual = Some(result.residual);
        }
        Err(e) => row.error = Some(e.to_string()),
    }
    row
}

/// Closed-form and finite-difference principal eigenvalues for each K, rows
/// evaluated in parallel and sorted by K.
pub fn stability_sweep(
    k_values: &[f64],
    template: &RadialProblem,
) -> Result<SweepReport, SpectralError> {
    if let Some(bad) = k_values.iter().find(|k| !k.is_finite()) {
        return Err(SpectralError::InvalidInput(format!(
            "K values must be finite, got {bad}"
        )));
    }
    let mut ks = k_values.to_vec();
    ks.sort_by(f64::total_cmp);
    let rows: Vec<SweepRow> = ks.par_iter().map(|&k| row(k, template)).collect();
    let max_discrepancy = rows
        .iter()
        .filter_map(|r| r.discrepancy)
        .fold(0.0, f64::max);
    let max_residual = rows.iter().filter_map(|r| r.residual).fold(0.0, f64::max);
    Ok(SweepReport {
        rows,
        depth: template.depth(),
        step: template.step(),
        coordinate: template.coordinate(),
        margin: STABILITY_MARGIN,
        max_discrepancy,
        max_residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub closed: f64,
    pub fd: f64,
    pub discrepancy: f64,
    pub depth: f64,
    pub step: f64,
}

const FD_DEPTH: f64 = 100.0;
const FD_STEP: f64 = 0.01;
const FD_TOLERANCE: f64 = 0.05;

/// Root of μ₁(K) on (1, 6) from the closed form, cross-checked by bisection
/// on the sign of the finite-difference μ₁ over K ∈ [4, 6].
pub fn stability_threshold() -> Result<ThresholdReport, SpectralError> {
    let closed = find_root(mu1_closed, &Bracket::new(1.0, 6.0, 1e-14)?)?;
    let template = RadialProblem::new(4.0, FD_DEPTH, FD_STEP, Coordinate::Z)?;
    let mu_fd = |k: f64| -> Result<f64, SpectralError> {
        Ok(super::radial_eigenvalue(&template.with_k(k)?)? - 6.0)
    };
    let (mut lo, mut hi) = (4.0, 6.0);
    if !(mu_fd(lo)? < 0.0 && mu_fd(hi)? > 0.0) {
        return Err(SpectralError::Consistency(
            "finite-difference μ₁ does not change sign on [4, 6]".into(),
        ));
    }
    while hi - lo > 1e-6 {
        let mid = 0.5 * (lo + hi);
        if mu_fd(mid)? > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let fd = 0.5 * (lo + hi);
    let discrepancy = (fd - closed).abs();
    if discrepancy > FD_TOLERANCE {
        return Err(SpectralError::Consistency(format!(
            "finite-difference threshold {fd} disagrees with the closed form {closed}"
        )));
    }
    Ok(ThresholdReport {
        closed,
        fd,
        discrepancy,
        depth: FD_DEPTH,
        step: FD_STEP,
    })
}
