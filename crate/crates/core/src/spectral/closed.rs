use std::f64::consts::PI;

use super::SpectralError;
use crate::numerics::{find_root, Bracket};

/// Bottom of the essential spectrum of −∂² + 25/4 on the half line.
pub const ESSENTIAL_SPECTRUM_BOTTOM: f64 = 6.25;

/// Principal eigenvalue of the radial Robin problem on z ∈ (−∞, 0].
pub fn delta1_closed(k: f64) -> f64 {
    if k < 6.0 {
        ESSENTIAL_SPECTRUM_BOTTOM - (6.0 - k) * (6.0 - k) / 4.0
    } else {
        ESSENTIAL_SPECTRUM_BOTTOM
    }
}

/// Principal eigenvalue of the full second variation, λ₁ + δ₁ with λ₁ = −6.
pub fn mu1_closed(k: f64) -> f64 {
    delta1_closed(k) - 6.0
}

const SCAN_INTERVALS: usize = 20_000;

/// Smallest positive δ with κ sin√δ = √δ cos√δ, the principal eigenvalue of
/// −h″ on [0, 1] with h(0) = 0 and κh(1) = h′(1). κ = ±∞ is the Dirichlet
/// problem.
pub fn compact_analog_eigenvalue(kappa: f64) -> Result<f64, SpectralError> {
    if kappa == 0.0 || kappa.is_nan() {
        return Err(SpectralError::InvalidInput(format!(
            "kappa must be nonzero, got {kappa}"
        )));
    }
    if kappa.is_infinite() {
        return Ok(PI * PI);
    }
    // f(x)/x keeps the scan away from the trivial root at x = 0
    let f = |x: f64| kappa * x.sin() / x - x.cos();
    let (lo, hi) = (1e-6, 2.0 * PI);
    let dx = (hi - lo) / SCAN_INTERVALS as f64;
    let mut a = lo;
    let mut fa = f(a);
    let mut signs = String::new();
    for i in 1..=SCAN_INTERVALS {
        let b = lo + i as f64 * dx;
        let fb = f(b);
        if i % (SCAN_INTERVALS / 8) == 0 {
            signs.push(if fb >= 0.0 { '+' } else { '-' });
        }
        if fa == 0.0 {
            return Ok(a * a);
        }
        if fa.signum() != fb.signum() {
            let x = find_root(f, &Bracket::new(a, b, 1e-15)?)?;
            return Ok(x * x);
        }
        a = b;
        fa = fb;
    }
    Err(SpectralError::Consistency(format!(
        "no root of tan√δ = √δ/κ for κ = {kappa} on √δ ∈ [{lo}, {hi}]; sign pattern {signs}"
    )))
}

/// Least-squares fit of δ/π² − 1 ≈ c₁/κ + c₂/κ²; returns (c₁, c₂).
pub fn fit_first_order_coefficient(samples: &[(f64, f64)]) -> Result<(f64, f64), SpectralError> {
    if samples.len() < 2 {
        return Err(SpectralError::InvalidInput(
            "the fit needs at least two (κ, δ) samples".into(),
        ));
    }
    let (mut s11, mut s12, mut s22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(kappa, delta) in samples {
        let x1 = 1.0 / kappa;
        let x2 = x1 * x1;
        let y = delta / (PI * PI) - 1.0;
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        r1 += x1 * y;
        r2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    if det.abs() <= 1e-300 {
        return Err(SpectralError::InvalidInput(
            "the fit needs at least two distinct κ values".into(),
        ));
    }
    Ok(((r1 * s22 - r2 * s12) / det, (s11 * r2 - s12 * r1) / det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn closed_form_values() {
        assert_eq!(delta1_closed(1.0), 0.0);
        assert_eq!(delta1_closed(6.0), 6.25);
        assert_eq!(delta1_closed(5.0), 6.0);
        assert_eq!(mu1_closed(1.0), -6.0);
        assert_eq!(mu1_closed(10.0), 0.25);
        assert_eq!(mu1_closed(5.0), 0.0);
    }

    #[test]
    fn dirichlet_limit() {
        let d = compact_analog_eigenvalue(1e8).unwrap();
        assert!((d - PI * PI).abs() < 1e-5);
        assert_eq!(compact_analog_eigenvalue(f64::INFINITY).unwrap(), PI * PI);
        assert!(compact_analog_eigenvalue(0.0).is_err());
    }

    #[test]
    fn first_order_asymptotics() {
        // oracle: the root satisfies the transcendental equation directly
        for &kappa in &[25.0, 50.0, 100.0, 200.0, -100.0] {
            let d = compact_analog_eigenvalue(kappa).unwrap();
            let x = d.sqrt();
            assert!((kappa * x.sin() - x * x.cos()).abs() < 1e-9);
            assert!((d - PI * PI * (1.0 + 2.0 / kappa)).abs() <= 5.0 * PI * PI / (kappa * kappa));
        }
        let below = compact_analog_eigenvalue(-100.0).unwrap();
        let above = compact_analog_eigenvalue(100.0).unwrap();
        assert!(below < PI * PI && above > PI * PI);
        // symmetric to first order
        let mid = 0.5 * (below + above) - PI * PI;
        assert!(mid.abs() < 5.0 * PI * PI / 1e4);
    }

    #[test]
    fn small_kappa_root_is_the_smallest() {
        // for 0 < κ < 1 the principal root lies in (0, π/2)
        let d = compact_analog_eigenvalue(0.5).unwrap();
        assert!(d.sqrt() < PI / 2.0);
        let x = d.sqrt();
        assert!((0.5 * x.sin() - x * x.cos()).abs() < 1e-10);
    }

    #[test]
    fn fitted_coefficient_near_two() {
        let samples: Vec<(f64, f64)> = [25.0, 50.0, 100.0, 200.0]
            .iter()
            .map(|&k| (k, compact_analog_eigenvalue(k).unwrap()))
            .collect();
        let (c1, c2) = fit_first_order_coefficient(&samples).unwrap();
        assert!((c1 - 2.0).abs() < 0.1, "{c1}");
        // second-order coefficient of the expansion is 3
        assert!((c2 - 3.0).abs() < 1.0, "{c2}");
    }

    proptest! {
        #[test]
        fn delta1_is_continuous_and_monotone(k in -20.0f64..6.0, dk in 0.0f64..3.0) {
            prop_assert!(delta1_closed(k) <= delta1_closed(k + dk) + 1e-12);
            prop_assert!((mu1_closed(k) > 0.0) == (k > 5.0));
        }

        #[test]
        fn saturates_beyond_six(k in 6.0f64..1e6) {
            prop_assert_eq!(delta1_closed(k), 6.25);
            prop_assert_eq!(mu1_closed(k), 0.25);
        }
    }
}
