use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::numerics::{lowest_eigenvalues, TridiagonalSystem};

/// Spherical-harmonic degrees (k, l) on the two S³ factors of the cone's
/// link S³(1/√2) × S³(1/√2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AngularMode {
    pub k: u32,
    pub l: u32,
}

impl AngularMode {
    pub const PRINCIPAL: Self = Self { k: 0, l: 0 };

    pub fn new(k: u32, l: u32) -> Self {
        Self { k, l }
    }
}

/// Eigenvalue of −Δ − 6 on the link: each factor has radius 1/√2, so the
/// Laplacian eigenvalues k(k+2) of the unit sphere double.
pub fn angular_eigenvalue(mode: AngularMode) -> f64 {
    let (k, l) = (mode.k as f64, mode.l as f64);
    2.0 * (k * (k + 2.0) + l * (l + 2.0)) - 6.0
}

/// First `n_modes` eigenvalues of the zonal Laplacian −(sin²ψ f′)′/sin²ψ on
/// the unit S³, by a cell-centered finite-volume scheme with `grid` cells on
/// [0, π]. The poles carry no flux.
pub fn zonal_sphere_spectrum(n_modes: usize, grid: usize) -> Result<Vec<f64>, SpectralError> {
    if grid < 200 {
        return Err(SpectralError::InvalidInput(format!(
            "zonal grid needs at least 200 cells, got {grid}"
        )));
    }
    if n_modes > grid {
        return Err(SpectralError::InvalidInput(format!(
            "{n_modes} modes requested from {grid} cells"
        )));
    }
    let h = std::f64::consts::PI / grid as f64;
    // exact cell masses ∫ sin²ψ dψ
    let mass: Vec<f64> = (0..grid)
        .map(|i| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            0.5 * (b - a) - 0.25 * ((2.0 * b).sin() - (2.0 * a).sin())
        })
        .collect();
    // face fluxes between neighbouring cell centers, harmonic in sin²
    let flux: Vec<f64> = (0..grid - 1)
        .map(|i| {
            let (a, b) = ((i as f64 + 0.5) * h, (i as f64 + 1.5) * h);
            1.0 / (1.0 / a.tan() - 1.0 / b.tan())
        })
        .collect();
    let diag = (0..grid)
        .map(|i| {
            let left = if i > 0 { flux[i - 1] } else { 0.0 };
            let right = if i + 1 < grid { flux[i] } else { 0.0 };
            (left + right) / mass[i]
        })
        .collect();
    let off = (0..grid - 1)
        .map(|i| -flux[i] / (mass[i] * mass[i + 1]).sqrt())
        .collect();
    let system = TridiagonalSystem::new(diag, off)?;
    Ok(lowest_eigenvalues(&system, n_modes)?)
}
