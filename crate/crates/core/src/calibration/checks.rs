use std::f64::consts::FRAC_PI_4;

use serde::Serialize;

use super::{CalibrationError, UnitField};
use crate::geometry::{
    boundary_normal, boundary_point, boundary_radius, boundary_radius_derivative, cone_curve,
    cross_section_distance, endpoint_angle, weighted_area, AngularCoordinate, DomainParams,
    GeneratingCurve, Point, Side, ORBIT_FACTOR,
};
use crate::numerics::{gauss_legendre_4, integrate_samples};

/// |X·n| on the cone's trace counts as zero below this.
pub const SIGN_ZERO_TOL: f64 = 1e-6;

/// Target θ-spacing of boundary flux quadrature.
const FLUX_SPACING: f64 = 1e-4;

/// Fraction of the bump crest d* inside which the strict signs are claimed.
const SAFE_FRACTION: f64 = 0.6;

/// (2π²)² ∫ u³v³ X·n dσ over the boundary arc θ ∈ [from, to] of Ω, by
/// Simpson's rule in θ with the line element folded into ρe_r − ρ′e_θ.
pub fn boundary_flux<F: UnitField + ?Sized>(
    params: &DomainParams,
    field: &F,
    from: f64,
    to: f64,
) -> Result<f64, CalibrationError> {
    if to < from {
        return Ok(-boundary_flux(params, field, to, from)?);
    }
    if to == from {
        return Ok(0.0);
    }
    let mut n = ((to - from) / FLUX_SPACING).ceil() as usize;
    n = (n + n % 2).max(8);
    let step = (to - from) / n as f64;
    let mut values = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let theta = AngularCoordinate::new((from + i as f64 * step).min(to))?;
        let p = boundary_point(theta, params);
        let (s, c) = theta.value().sin_cos();
        let rho = boundary_radius(theta, params);
        let drho = boundary_radius_derivative(theta, params);
        let normal_element = Point::new(c, s) * rho - Point::new(-s, c) * drho;
        let x = field.value(p)?;
        values.push((p.x * p.y).powi(3) * x.dot(&normal_element));
    }
    Ok(ORBIT_FACTOR * integrate_samples(&values, step)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussGreenReport {
    /// |M ∩ Ω| from the weighted area of the cone segment.
    pub area: f64,
    /// −∫_{N∩∂Ω} X·n.
    pub flux: f64,
    /// Relative discrepancy |area − flux| / area.
    pub discrepancy: f64,
}

/// Compares |M ∩ Ω| with −∫_{N∩∂Ω} X·n, N∩∂Ω being the arc θ ∈ [0, π/4].
pub fn gauss_green_check<F: UnitField + ?Sized>(
    params: &DomainParams,
    field: &F,
) -> Result<GaussGreenReport, CalibrationError> {
    let area = weighted_area(&cone_curve(2)?);
    let flux = -boundary_flux(params, field, 0.0, FRAC_PI_4)?;
    Ok(GaussGreenReport {
        area,
        flux,
        discrepancy: (area - flux).abs() / area,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignSample {
    pub side: Side,
    pub distance: f64,
    pub theta: f64,
    pub x_dot_n: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignBandReport {
    pub k: f64,
    pub upsilon: f64,
    /// X·n at θ = π/4.
    pub trace_value: f64,
    pub band: f64,
    pub samples: Vec<SignSample>,
    pub n_side_positive: bool,
    pub far_side_negative: bool,
    pub first_violation: Option<SignSample>,
    pub bump_crest: f64,
    pub d_safe_claimed: f64,
    /// Largest d such that the strict signs hold on both sides on (0, d].
    pub d_safe_measured: f64,
    pub pass: bool,
}

fn angle_at(distance: f64, side: Side) -> f64 {
    let offset = 2.0 * (distance / 2.0).asin();
    match side {
        Side::BelowDiagonal => FRAC_PI_4 - offset,
        Side::AboveDiagonal => FRAC_PI_4 + offset,
    }
}

fn sample<F: UnitField + ?Sized>(
    params: &DomainParams,
    field: &F,
    distance: f64,
    side: Side,
) -> Result<SignSample, CalibrationError> {
    let theta = AngularCoordinate::new(angle_at(distance, side))?;
    let x = field.value(boundary_point(theta, params))?;
    Ok(SignSample {
        side,
        distance,
        theta: theta.value(),
        x_dot_n: x.dot(&boundary_normal(theta, params)),
    })
}

fn strict_sign(s: &SignSample) -> bool {
    match s.side {
        Side::BelowDiagonal => s.x_dot_n > 0.0,
        Side::AboveDiagonal => s.x_dot_n < 0.0,
    }
}

/// Samples X·n on ∂Ω at distances d ∈ (0, υ/2] from the cone's trace on both
/// sides: strictly positive on the N side, strictly negative on the other,
/// zero on the trace. Also scans (0, 2υ] for the extent of the strict band.
pub fn sign_band_check<F: UnitField + ?Sized>(
    params: &DomainParams,
    field: &F,
    n_samples: usize,
) -> Result<SignBandReport, CalibrationError> {
    if params.k() < 0.0 {
        return Err(CalibrationError::InvalidInput(format!(
            "the sign check needs K ≥ 0, got {}",
            params.k()
        )));
    }
    if n_samples == 0 {
        return Err(CalibrationError::InvalidInput(
            "need at least one sample".into(),
        ));
    }
    let trace = AngularCoordinate::cone();
    let trace_value = field
        .value(boundary_point(trace, params))?
        .dot(&boundary_normal(trace, params));

    let band = 0.5 * params.upsilon();
    let mut samples = Vec::with_capacity(2 * n_samples);
    for side in [Side::BelowDiagonal, Side::AboveDiagonal] {
        for i in 1..=n_samples {
            samples.push(sample(
                params,
                field,
                band * i as f64 / n_samples as f64,
                side,
            )?);
        }
    }
    let first_violation = samples.iter().find(|s| !strict_sign(s)).copied();
    let n_side_positive = samples
        .iter()
        .filter(|s| s.side == Side::BelowDiagonal)
        .all(strict_sign);
    let far_side_negative = samples
        .iter()
        .filter(|s| s.side == Side::AboveDiagonal)
        .all(strict_sign);

    let scan = 2000;
    let reach = 2.0 * params.upsilon();
    let mut d_safe_measured = 0.0;
    for i in 1..=scan {
        let d = reach * i as f64 / scan as f64;
        let ok = strict_sign(&sample(params, field, d, Side::BelowDiagonal)?)
            && strict_sign(&sample(params, field, d, Side::AboveDiagonal)?);
        if !ok {
            break;
        }
        d_safe_measured = d;
    }
    let bump_crest = params.bump_crest();
    let d_safe_claimed = SAFE_FRACTION * bump_crest;
    let pass = trace_value.abs() <= SIGN_ZERO_TOL
        && n_side_positive
        && far_side_negative
        && d_safe_measured >= d_safe_claimed;
    Ok(SignBandReport {
        k: params.k(),
        upsilon: params.upsilon(),
        trace_value,
        band,
        samples,
        n_side_positive,
        far_side_negative,
        first_violation,
        bump_crest,
        d_safe_claimed,
        d_safe_measured,
        pass,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalityReport {
    /// |M′ ∩ Ω|.
    pub lhs: f64,
    /// |M ∩ Ω|.
    pub cone_area: f64,
    /// ∫_{(N∖N′)∩∂Ω} X·n.
    pub flux_lost: f64,
    /// ∫_{(N′∖N)∩∂Ω} X·n.
    pub flux_gained: f64,
    pub rhs: f64,
    pub slack: f64,
    /// ∫_{M′∩Ω} X·ν with ν the outward normal of N′.
    pub calibration_flux: f64,
    /// −∫_{N′∩∂Ω} X·n.
    pub boundary_flux: f64,
    /// ∫_{M′∩Ω} (1 − X·ν) ≥ 0.
    pub defect: f64,
    /// Relative difference of the two flux routes.
    pub flux_gap: f64,
    pub endpoint_theta: f64,
    pub endpoint_distance: f64,
    pub d_safe: f64,
    pub in_regime: bool,
    pub inequality_holds: bool,
    pub pass: bool,
}

/// Evaluates every term of |M′∩Ω| ≥ |M∩Ω| + ∫_{(N∖N′)∩∂Ω} X·n − ∫_{(N′∖N)∩∂Ω} X·n
/// for a competitor running from the vertex to ∂Ω with N′ on its right.
/// Competitors whose boundary trace lies beyond 0.6·d* are reported as out of
/// regime and do not pass.
pub fn minimality_check<F: UnitField + ?Sized>(
    competitor: &GeneratingCurve,
    params: &DomainParams,
    field: &F,
) -> Result<MinimalityReport, CalibrationError> {
    if competitor.len() < 2 {
        return Err(CalibrationError::InvalidInput(
            "competitor needs two vertices".into(),
        ));
    }
    if competitor.first().is_none_or(|p| p.norm() > 1e-12) {
        return Err(CalibrationError::InvalidInput(
            "competitor must start at the cone vertex".into(),
        ));
    }
    let end = endpoint_angle(competitor)?;
    let theta_e = end.value();
    let endpoint_distance = cross_section_distance(end);
    let d_safe = SAFE_FRACTION * params.bump_crest();
    let in_regime = endpoint_distance <= d_safe;

    let lhs = weighted_area(competitor);
    let cone_area = weighted_area(&cone_curve(2)?);
    let (flux_lost, flux_gained) = if theta_e < FRAC_PI_4 {
        (boundary_flux(params, field, theta_e, FRAC_PI_4)?, 0.0)
    } else {
        (0.0, boundary_flux(params, field, FRAC_PI_4, theta_e)?)
    };
    let rhs = cone_area + flux_lost - flux_gained;
    let slack = lhs - rhs;

    let (nodes, weights) = gauss_legendre_4();
    let (mut calibration_flux, mut defect) = (0.0, 0.0);
    for (a, b) in competitor.segments() {
        let d = b - a;
        let len = d.norm();
        // N′ lies to the right of the direction of travel
        let nu = Point::new(-d.y, d.x) / len;
        let (mut flux_acc, mut defect_acc) = (0.0, 0.0);
        for (x, w) in nodes.iter().zip(&weights) {
            let p = a + d * *x;
            let weight = (p.x * p.y).powi(3);
            let dot = field.value(p)?.dot(&nu);
            flux_acc += w * weight * dot;
            defect_acc += w * weight * (1.0 - dot);
        }
        calibration_flux += flux_acc * len;
        defect += defect_acc * len;
    }
    calibration_flux *= ORBIT_FACTOR;
    defect *= ORBIT_FACTOR;
    let boundary = -boundary_flux(params, field, 0.0, theta_e)?;
    let flux_gap = (calibration_flux - boundary).abs() / lhs;
    let inequality_holds = slack >= -1e-6 * lhs;
    Ok(MinimalityReport {
        lhs,
        cone_area,
        flux_lost,
        flux_gained,
        rhs,
        slack,
        calibration_flux,
        boundary_flux: boundary,
        defect,
        flux_gap,
        endpoint_theta: theta_e,
        endpoint_distance,
        d_safe,
        in_regime,
        inequality_holds,
        pass: in_regime && inequality_holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::{CalibrationField, RadialField, DEFAULT_FIELD_TOL};
    use crate::geometry::{make_competitor, trace_curve, Perturbation, PerturbationTerm};
    use std::f64::consts::PI;
    use std::sync::OnceLock;

    fn field() -> &'static CalibrationField {
        static FIELD: OnceLock<CalibrationField> = OnceLock::new();
        FIELD.get_or_init(|| CalibrationField::new(DEFAULT_FIELD_TOL).unwrap())
    }

    #[test]
    fn gauss_green_on_the_ball_and_the_deformed_domain() {
        for params in [
            DomainParams::default().undeformed(),
            DomainParams::default(),
        ] {
            let r = gauss_green_check(&params, field()).unwrap();
            assert!((r.area - PI.powi(4) / 14.0).abs() < 1e-12);
            assert!(r.discrepancy <= 1e-4, "K={}: {}", params.k(), r.discrepancy);
        }
    }

    #[test]
    fn radial_field_flux_is_not_the_area() {
        // the radial field is not divergence free, so the identity fails
        let r = gauss_green_check(&DomainParams::default().undeformed(), &RadialField).unwrap();
        assert!(r.discrepancy > 0.5);
    }

    #[test]
    fn sign_band_for_the_default_domain() {
        let r = sign_band_check(&DomainParams::default(), field(), 200).unwrap();
        assert!(r.trace_value.abs() <= SIGN_ZERO_TOL);
        assert!(
            r.n_side_positive && r.far_side_negative,
            "{:?}",
            r.first_violation
        );
        assert!(r.d_safe_measured >= r.d_safe_claimed);
        assert!(r.d_safe_measured < 2.0 * DomainParams::default().upsilon());
        assert!(r.pass);
    }

    #[test]
    fn undeformed_ball_fails_the_strict_signs() {
        let params = DomainParams::default().undeformed();
        let r = sign_band_check(&params, field(), 200).unwrap();
        assert!(!r.pass);
        assert!(r.first_violation.is_some());
        let bad = DomainParams::new(-1.0, 0.1).unwrap();
        assert!(sign_band_check(&bad, field(), 10).is_err());
    }

    #[test]
    fn cone_is_an_equality_case() {
        let params = DomainParams::default();
        let cone = make_competitor(&Perturbation::zero(), &params).unwrap();
        let r = minimality_check(&cone, &params, field()).unwrap();
        assert!(r.slack.abs() <= 1e-6 * r.lhs, "{}", r.slack);
        assert!(r.defect.abs() <= 1e-12 * r.lhs);
        assert!(r.pass);
    }

    #[test]
    fn perturbed_competitors_have_positive_slack() {
        let params = DomainParams::default();
        for seed in 0..3 {
            let c = make_competitor(&Perturbation::random(seed, &params), &params).unwrap();
            let r = minimality_check(&c, &params, field()).unwrap();
            assert!(r.in_regime);
            assert!(r.slack > 0.0, "seed {seed}: {r:?}");
            assert!(r.defect > 0.0);
            assert!(r.flux_gap < 1e-6, "seed {seed}: {}", r.flux_gap);
            assert!((r.slack - r.defect).abs() < 1e-6 * r.lhs);
        }
    }

    #[test]
    fn beyond_band_is_out_of_regime() {
        let params = DomainParams::default();
        let spec = Perturbation {
            terms: vec![PerturbationTerm::Tilt { amplitude: 0.15 }],
            match_volume: false,
        };
        let c = trace_curve(&spec, &params, 1001).unwrap();
        let r = minimality_check(&c, &params, field()).unwrap();
        assert!(!r.in_regime);
        assert!(!r.pass);
    }
}
