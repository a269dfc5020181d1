use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

use serde::Serialize;

use super::CalibrationError;
use crate::geometry::{GeneratingCurve, Point, Side};
use crate::numerics::{integrate_ode_with, NumericsError, OdeOptions, OdeState};

/// Axis offset (relative to the axis crossing) where the series start hands
/// over to the integrator.
pub const SERIES_START: f64 = 1e-3;

/// Radius up to which the calibration is used.
pub const LEAF_RADIUS: f64 = 2.0;

/// State (s, w, β) of a leaf in cone coordinates s = (u+v)/√2,
/// w = (v−u)/√2, with β the tangent angle measured from the cone direction.
/// Arclength parametrization:
///   s′ = cos β, w′ = sin β, β′ = −6(w cos β + s sin β)/(s² − w²),
/// the curvature condition κ = 3(cos α/v − sin α/u) for critical points of
/// ∫ u³v³ ds.
pub(crate) fn leaf_field(_t: f64, y: &[f64]) -> Vec<f64> {
    let (s, w, beta) = (y[0], y[1], y[2]);
    let (sb, cb) = beta.sin_cos();
    vec![cb, sb, -6.0 * (w * cb + s * sb) / ((s - w) * (s + w))]
}

/// Taylor start of the upper base leaf v(u) = 1 + (3/8)u² − (15/512)u⁴
/// near the v-axis: the point and tangent angle α at u.
pub(crate) fn series_point(u: f64) -> (Point, f64) {
    let v = 1.0 + 0.375 * u * u - 15.0 / 512.0 * u.powi(4);
    let slope = 0.75 * u - 15.0 / 128.0 * u.powi(3);
    (Point::new(u, v), slope.atan())
}

pub(crate) fn to_cone(p: Point) -> (f64, f64) {
    ((p.x + p.y) * FRAC_1_SQRT_2, (p.y - p.x) * FRAC_1_SQRT_2)
}

pub(crate) fn from_cone(s: f64, w: f64) -> Point {
    Point::new((s - w) * FRAC_1_SQRT_2, (s + w) * FRAC_1_SQRT_2)
}

/// A leaf of the foliation: the base leaf of one side scaled by `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct Leaf {
    pub curve: GeneratingCurve,
    pub side: Side,
    pub scale: f64,
}

impl Leaf {
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            curve: self.curve.scaled(lambda),
            side: self.side,
            scale: self.scale * lambda,
        }
    }
}

/// Raw leaf path in cone coordinates for the upper side, from the series
/// start until `stop` holds.
pub(crate) fn integrate_upper<S>(tol: f64, stop: S) -> Result<Vec<OdeState>, CalibrationError>
where
    S: Fn(&OdeState) -> bool,
{
    let (p, alpha) = series_point(SERIES_START);
    let (s, w) = to_cone(p);
    let initial = OdeState::new(0.0, vec![s, w, alpha - FRAC_PI_4], 1e-4);
    let options = OdeOptions::with_tol(tol);
    let path = integrate_ode_with(
        leaf_field,
        initial,
        |state: &OdeState| state.y[1] <= 0.0 || stop(state),
        &options,
    )
    .map_err(|e| match e {
        NumericsError::Singularity { last } => CalibrationError::Integration(format!(
            "step underflow at s = {}, w = {}",
            last.y[0], last.y[1]
        )),
        other => CalibrationError::Numerics(other),
    })?;
    if path.last().is_none_or(|st| st.y[1] <= 0.0) {
        return Err(CalibrationError::Integration(
            "leaf crossed the diagonal".into(),
        ));
    }
    Ok(path)
}

/// Base leaf of the given side from its axis crossing at distance 1 out to
/// radius 2. The lower leaf is integrated separately from (1, 0) as the
/// mirror problem.
pub fn integrate_base_leaf(side: Side, tol: f64) -> Result<Leaf, CalibrationError> {
    if !(tol > 0.0 && tol <= 1e-8) {
        return Err(CalibrationError::InvalidInput(format!(
            "leaf tolerance must lie in (0, 1e-8], got {tol}"
        )));
    }
    let path = match side {
        Side::AboveDiagonal => integrate_upper(tol, |st| st.y[0].hypot(st.y[1]) >= LEAF_RADIUS)?,
        Side::BelowDiagonal => integrate_lower(tol)?,
    };
    let mut vertices = vec![match side {
        Side::AboveDiagonal => Point::new(0.0, 1.0),
        Side::BelowDiagonal => Point::new(1.0, 0.0),
    }];
    vertices.extend(path.iter().map(|st| from_cone(st.y[0], st.y[1])));
    let curve = GeneratingCurve::new(vertices, side)?;
    Ok(Leaf {
        curve,
        side,
        scale: 1.0,
    })
}

fn integrate_lower(tol: f64) -> Result<Vec<OdeState>, CalibrationError> {
    // mirror start: u = 1 + (3/8)v² − …, tangent angle π/2 − α
    let (p, alpha) = series_point(SERIES_START);
    let (s, w) = to_cone(Point::new(p.y, p.x));
    let beta = std::f64::consts::FRAC_PI_2 - alpha - FRAC_PI_4;
    let initial = OdeState::new(0.0, vec![s, w, beta], 1e-4);
    let path = integrate_ode_with(
        leaf_field,
        initial,
        |st: &OdeState| st.y[1] >= 0.0 || st.y[0].hypot(st.y[1]) >= LEAF_RADIUS,
        &OdeOptions::with_tol(tol),
    )?;
    if path.last().is_none_or(|st| st.y[1] >= 0.0) {
        return Err(CalibrationError::Integration(
            "leaf crossed the diagonal".into(),
        ));
    }
    Ok(path)
}

/// Distance of each vertex from the diagonal, in order along the leaf.
pub fn diagonal_distances(leaf: &Leaf) -> Vec<f64> {
    leaf.curve
        .vertices()
        .iter()
        .map(|p| (p.y - p.x).abs() * FRAC_1_SQRT_2)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafSummary {
    pub vertices: usize,
    pub end_radius: f64,
    pub end_distance: f64,
    pub distance_at_unit_radius: f64,
    pub monotone_approach: bool,
}

pub fn summarize_leaf(leaf: &Leaf) -> LeafSummary {
    let vertices = leaf.curve.vertices();
    let dist = diagonal_distances(leaf);
    let end = *vertices.last().unwrap();
    let unit = vertices
        .iter()
        .zip(&dist)
        .find(|(p, _)| p.norm() >= 1.0)
        .map(|(_, d)| *d)
        .unwrap_or(f64::NAN);
    LeafSummary {
        vertices: vertices.len(),
        end_radius: end.norm(),
        end_distance: *dist.last().unwrap(),
        distance_at_unit_radius: unit,
        monotone_approach: dist.windows(2).all(|w| w[1] < w[0]),
    }
}
