use serde::Serialize;

use super::{angular_eigenvalue, change_of_variables, AngularMode, SpectralError};
use crate::numerics::{derivative_samples, integrate_samples};

/// Second variation of area for η = g(t)·Y(ω) with ‖Y‖ = 1, and the t⁴-weighted
/// norm of g.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondVariation {
    pub energy: f64,
    pub norm_squared: f64,
}

impl SecondVariation {
    pub fn quotient(&self) -> f64 {
        self.energy / self.norm_squared
    }
}

/// ∫ t⁶g′² dt + λ(mode)∫ t⁴g² dt + ½(K−1)g(1)² on a log-uniform t-grid ending
/// at t = 1, where λ(mode) is the eigenvalue of −Δ − 6 on the link. The
/// integrals are evaluated in z = log t through h = t^{5/2}g, where they read
/// ∫ (h′ − 5h/2)² dz and ∫ h² dz.
pub fn second_variation(
    t: &[f64],
    g: &[f64],
    mode: AngularMode,
    k: f64,
) -> Result<SecondVariation, SpectralError> {
    if !k.is_finite() {
        return Err(SpectralError::InvalidInput(format!(
            "K must be finite, got {k}"
        )));
    }
    if t.len() < 5 || t.len() != g.len() {
        return Err(SpectralError::InvalidInput(
            "need matching t and g with at least 5 samples".into(),
        ));
    }
    if (t[t.len() - 1] - 1.0).abs() > 1e-12 {
        return Err(SpectralError::InvalidInput(
            "t-grid must end at t = 1".into(),
        ));
    }
    let (z, h) = change_of_variables(t, g)?;
    let step = z[1] - z[0];
    if !(step > 0.0)
        || z.windows(2)
            .any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.max(1.0))
    {
        return Err(SpectralError::InvalidInput(
            "t-grid must be log-uniform".into(),
        ));
    }
    let max = h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(max.is_finite() && max > 0.0) {
        return Err(SpectralError::Precondition(
            "g must be bounded and nonzero".into(),
        ));
    }
    if h[0].abs() > 1e-8 * max {
        return Err(SpectralError::Precondition(format!(
            "g does not vanish at the inner cutoff: |t^(5/2) g| = {:e}",
            h[0].abs()
        )));
    }
    let dh = derivative_samples(&h, step)?;
    let gradient: Vec<f64> = h
        .iter()
        .zip(&dh)
        .map(|(h, d)| (d - 2.5 * h).powi(2))
        .collect();
    let squares: Vec<f64> = h.iter().map(|h| h * h).collect();
    let norm_squared = integrate_samples(&squares, step)?;
    let g1 = g[g.len() - 1];
    let energy = integrate_samples(&gradient, step)?
        + angular_eigenvalue(mode) * norm_squared
        + 0.5 * (k - 1.0) * g1 * g1;
    Ok(SecondVariation {
        energy,
        norm_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{radial_eigensolve_t, radial_energy, Coordinate, RadialProblem};

    fn log_grid(depth: f64, step: f64) -> Vec<f64> {
        let n = (depth / step).round() as usize;
        (0..=n).map(|j| (-((n - j) as f64) * step).exp()).collect()
    }

    #[test]
    fn two_routes_agree_for_a_power() {
        let t = log_grid(30.0, 1e-3);
        let g: Vec<f64> = t.clone();
        let sv = second_variation(&t, &g, AngularMode::PRINCIPAL, 8.0).unwrap();
        let (_, h) = change_of_variables(&t, &g).unwrap();
        let via_z = radial_energy(&h, 1e-3, 8.0).unwrap() - 6.0 * sv.norm_squared;
        assert!(
            (sv.energy - via_z).abs() <= 1e-6,
            "{} vs {via_z}",
            sv.energy
        );
        // analytic: ∫ t⁶ dt + (−6)∫ t⁶ dt + 7/2 = 1/7 − 6/7 + 7/2
        assert!((sv.energy - (1.0 / 7.0 - 6.0 / 7.0 + 3.5)).abs() < 1e-9);
        assert!((sv.norm_squared - 1.0 / 7.0).abs() < 1e-10);
    }

    #[test]
    fn principal_quotient_at_k8() {
        let p = RadialProblem::new(8.0, 200.0, 0.01, Coordinate::T).unwrap();
        let r = radial_eigensolve_t(&p).unwrap();
        let sv = second_variation(&r.nodes, &r.eigenfunction, AngularMode::PRINCIPAL, 8.0).unwrap();
        assert!((sv.quotient() - 0.25).abs() <= 1e-3, "{}", sv.quotient());
    }

    #[test]
    fn angular_gap() {
        let t = log_grid(30.0, 1e-2);
        let g: Vec<f64> = t.iter().map(|&t| t * (1.0 - 0.3 * t)).collect();
        let q0 = second_variation(&t, &g, AngularMode::PRINCIPAL, 3.0)
            .unwrap()
            .quotient();
        let q1 = second_variation(&t, &g, AngularMode::new(1, 0), 3.0)
            .unwrap()
            .quotient();
        assert!(q1 >= q0 + 6.0 - 1e-12);
    }

    #[test]
    fn rejects_non_log_grid() {
        let t: Vec<f64> = (1..=10).map(|j| j as f64 / 10.0).collect();
        let g = t.clone();
        assert!(second_variation(&t, &g, AngularMode::PRINCIPAL, 8.0).is_err());
    }
}
