use std::cell::RefCell;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    boundary_point, boundary_radius, cross_section_distance, weighted_volume, AngularCoordinate,
    DomainParams, GeneratingCurve, GeometryError, Point, ReducedRegion, Side,
};
use crate::numerics::{find_root, Bracket};

/// Vertex count of competitor polylines.
pub const DEFAULT_CURVE_VERTICES: usize = 4001;

/// Number of intervals of the shared θ-grid on [0, π/2] used for boundary arcs.
pub const ARC_SEGMENTS: usize = 20_000;

const MATCH_CENTER: f64 = 0.6;
const MATCH_WIDTH: f64 = 0.35;
const MATCH_TOL: f64 = 1e-8;
const SCAN_STEP: f64 = 1e-3;
const SCAN_LIMIT: f64 = 3.0;

/// One additive term of the normal offset n(s) along the cone direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PerturbationTerm {
    /// amplitude·(1 − x²)³ with x = (s − center)/width, zero for |x| ≥ 1.
    Bump {
        center: f64,
        width: f64,
        amplitude: f64,
    },
    /// amplitude·s; rotates the curve about the vertex.
    Tilt { amplitude: f64 },
}

impl PerturbationTerm {
    fn value(&self, s: f64) -> f64 {
        match *self {
            PerturbationTerm::Bump {
                center,
                width,
                amplitude,
            } => {
                let x = (s - center) / width;
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - x * x).powi(3)
                }
            }
            PerturbationTerm::Tilt { amplitude } => amplitude * s,
        }
    }
}

/// Competitor descriptor: the curve s·e_d + n(s)·e_n with e_d = (1, 1)/√2
/// along the cone and e_n = (1, −1)/√2 pointing into N = {u > v}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub terms: Vec<PerturbationTerm>,
    /// Add a bump whose amplitude is solved for so that the enclosed
    /// weighted volume equals that of N ∩ Ω.
    pub match_volume: bool,
}

impl Perturbation {
    pub fn zero() -> Self {
        Self {
            terms: Vec::new(),
            match_volume: false,
        }
    }

    pub fn normal_offset(&self, s: f64) -> f64 {
        self.terms.iter().map(|t| t.value(s)).sum()
    }

    /// Seeded random descriptor: a tilt of at most υ/4 and one to three
    /// bumps supported in [0.05, 0.95], volume matching on.
    pub fn random(seed: u64, params: &DomainParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let tilt = 0.25 * params.upsilon() * rng.gen_range(-1.0..=1.0);
        let mut terms = vec![PerturbationTerm::Tilt { amplitude: tilt }];
        let count = rng.gen_range(1..=3);
        for _ in 0..count {
            let width: f64 = rng.gen_range(0.05..=0.2);
            let lo = (0.05 + width).max(0.2);
            let hi = (0.95 - width).min(0.85);
            let center = rng.gen_range(lo..=hi);
            let magnitude: f64 = rng.gen_range(0.005..=0.03);
            let amplitude = if rng.gen_bool(0.5) {
                magnitude
            } else {
                -magnitude
            };
            terms.push(PerturbationTerm::Bump {
                center,
                width,
                amplitude,
            });
        }
        Self {
            terms,
            match_volume: true,
        }
    }

    fn with_term(&self, term: PerturbationTerm) -> Self {
        let mut terms = self.terms.clone();
        terms.push(term);
        Self {
            terms,
            match_volume: false,
        }
    }

    fn point(&self, s: f64) -> Point {
        let n = self.normal_offset(s);
        Point::new((s + n) * FRAC_1_SQRT_2, (s - n) * FRAC_1_SQRT_2)
    }
}

fn polar_angle(p: Point) -> Result<AngularCoordinate, GeometryError> {
    if p.x < 0.0 || p.y < 0.0 {
        return Err(GeometryError::Constraint(format!(
            "curve leaves the quadrant at ({}, {})",
            p.x, p.y
        )));
    }
    AngularCoordinate::new(p.y.atan2(p.x).clamp(0.0, FRAC_PI_2))
}

/// Parameter value where the curve first meets the reduced ∂Ω.
fn endpoint_parameter(spec: &Perturbation, params: &DomainParams) -> Result<f64, GeometryError> {
    let gap = |s: f64| -> Result<f64, GeometryError> {
        let p = spec.point(s);
        Ok(p.norm() - boundary_radius(polar_angle(p)?, params))
    };
    let mut prev = 0.0;
    let mut prev_gap = gap(0.0)?;
    let steps = (SCAN_LIMIT / SCAN_STEP) as usize;
    for i in 1..=steps {
        let s = i as f64 * SCAN_STEP;
        let g = gap(s)?;
        if g >= 0.0 && prev_gap < 0.0 {
            if g == 0.0 {
                return Ok(s);
            }
            let bracket = Bracket::new(prev, s, 1e-15)?;
            let root = find_root(
                |s| {
                    let p = spec.point(s);
                    let theta = p.y.max(0.0).atan2(p.x.max(0.0));
                    p.norm() - boundary_radius(AngularCoordinate::new(theta).unwrap(), params)
                },
                &bracket,
            )?;
            return Ok(root);
        }
        prev = s;
        prev_gap = g;
    }
    Err(GeometryError::Constraint(
        "curve does not reach the domain boundary".into(),
    ))
}

/// Builds the competitor polyline from the vertex to its first boundary
/// point without checking the closeness constraints.
pub fn trace_curve(
    spec: &Perturbation,
    params: &DomainParams,
    vertices: usize,
) -> Result<GeneratingCurve, GeometryError> {
    if vertices < 2 {
        return Err(GeometryError::InvalidInput(
            "a competitor needs at least two vertices".into(),
        ));
    }
    let end = endpoint_parameter(spec, params)?;
    let mut points = Vec::with_capacity(vertices);
    for j in 0..vertices {
        let s = end * j as f64 / (vertices - 1) as f64;
        let p = spec.point(s);
        polar_angle(p)?;
        points.push(p);
    }
    GeneratingCurve::new(points, Side::BelowDiagonal)
}

/// Polar angle of the curve's last vertex.
pub fn endpoint_angle(curve: &GeneratingCurve) -> Result<AngularCoordinate, GeometryError> {
    let p = curve
        .last()
        .ok_or_else(|| GeometryError::InvalidInput("empty curve".into()))?;
    polar_angle(p)
}

/// The cone segment from the vertex to the trace (1/√2, 1/√2) on ∂Ω.
pub fn cone_curve(vertices: usize) -> Result<GeneratingCurve, GeometryError> {
    GeneratingCurve::cone_segment(1.0, vertices.max(2) - 1)
}

/// Angles of the boundary arc from `from` down to θ = 0 on the shared grid.
pub fn arc_angles(from: AngularCoordinate) -> Vec<f64> {
    let spacing = FRAC_PI_2 / ARC_SEGMENTS as f64;
    let top = from.value();
    let mut out = vec![top];
    let start = (top / spacing).ceil() as usize;
    for j in (0..=start.min(ARC_SEGMENTS)).rev() {
        let theta = if 2 * j == ARC_SEGMENTS {
            FRAC_PI_4
        } else {
            j as f64 * spacing
        };
        if theta < top - 1e-12 {
            out.push(theta);
        }
    }
    if *out.last().unwrap() != 0.0 {
        out.push(0.0);
    }
    out
}

/// The reduced region bounded by `curve`, the arc of ∂Ω from the curve's
/// endpoint down to the u-axis, and the u-axis.
pub fn enclosed_region(
    curve: &GeneratingCurve,
    params: &DomainParams,
) -> Result<ReducedRegion, GeometryError> {
    let end = endpoint_angle(curve)?;
    let mut loop_points: Vec<Point> = curve.vertices().to_vec();
    for theta in arc_angles(end).into_iter().skip(1) {
        loop_points.push(boundary_point(AngularCoordinate::new(theta)?, params));
    }
    ReducedRegion::new(loop_points)
}

/// A competitor hypersurface inside Ω. Volume matching, when requested,
/// appends a bump centred at mid-radius whose amplitude is found by Brent's
/// method.
pub fn make_competitor(
    spec: &Perturbation,
    params: &DomainParams,
) -> Result<GeneratingCurve, GeometryError> {
    let vertices = DEFAULT_CURVE_VERTICES;
    let base = trace_curve(spec, params, vertices)?;
    let band = 0.5 * params.upsilon();
    let d_end = cross_section_distance(endpoint_angle(&base)?);
    if d_end > band {
        return Err(GeometryError::Constraint(format!(
            "boundary trace at distance {d_end:.6} from the cone exceeds υ/2 = {band}"
        )));
    }
    if !spec.match_volume {
        return Ok(base);
    }

    let target = weighted_volume(&enclosed_region(&cone_curve(vertices)?, params)?);
    let mismatch = |c: f64| -> Result<f64, GeometryError> {
        let matched = spec.with_term(PerturbationTerm::Bump {
            center: MATCH_CENTER,
            width: MATCH_WIDTH,
            amplitude: c,
        });
        let curve = trace_curve(&matched, params, vertices)?;
        Ok(weighted_volume(&enclosed_region(&curve, params)?) / target - 1.0)
    };
    let (lo, hi) = (-0.5, 0.5);
    let (f_lo, f_hi) = (mismatch(lo)?, mismatch(hi)?);
    if f_lo * f_hi > 0.0 {
        return Err(GeometryError::Constraint(format!(
            "volume matching has no sign change: {f_lo:e}, {f_hi:e}"
        )));
    }
    let failure = RefCell::new(None);
    let c = find_root(
        |c| match mismatch(c) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        &Bracket::new(lo, hi, 1e-15)?,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let c = c?;
    let matched = spec.with_term(PerturbationTerm::Bump {
        center: MATCH_CENTER,
        width: MATCH_WIDTH,
        amplitude: c,
    });
    let curve = trace_curve(&matched, params, vertices)?;
    let rel = weighted_volume(&enclosed_region(&curve, params)?) / target - 1.0;
    if rel.abs() > MATCH_TOL {
        return Err(GeometryError::Constraint(format!(
            "volume matching stalled at relative mismatch {rel:e}"
        )));
    }
    Ok(curve)
}
