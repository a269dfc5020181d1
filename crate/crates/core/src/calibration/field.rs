use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use super::leaf::{from_cone, integrate_upper, leaf_field, to_cone, LEAF_RADIUS};
use super::CalibrationError;
use crate::geometry::{mirror, Point, Side};
use crate::numerics::{dopri_step, find_root, Bracket};

/// Arclength-parameter extent of the tabulated upper leaf, in units of s.
pub const TABLE_EXTENT: f64 = 150.0;
pub const DEFAULT_FIELD_TOL: f64 = 1e-12;

/// Unit vector field on the quadrant.
pub trait UnitField {
    fn value(&self, p: Point) -> Result<Point, CalibrationError>;
}

/// p/|p|; its weighted divergence is 7/|p|.
#[derive(Debug, Clone, Copy, Default)]
pub struct RadialField;

impl UnitField for RadialField {
    fn value(&self, p: Point) -> Result<Point, CalibrationError> {
        let r = p.norm();
        if r == 0.0 {
            return Err(CalibrationError::Degenerate(
                "radial field at the origin".into(),
            ));
        }
        Ok(p / r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    t: f64,
    s: f64,
    w: f64,
    beta: f64,
    step: f64,
}

impl Node {
    fn ratio(&self) -> f64 {
        self.w / self.s
    }
}

/// Unit normal field of the minimal foliation, oriented out of N = {u > v}.
///
/// Leaves are homothetic, so X depends only on the polar angle. It is
/// evaluated from the upper base leaf: a series near the v-axis, a dense
/// integrated table out to s = [`TABLE_EXTENT`], and the asymptotic branch
/// w = a s⁻² + b s⁻³ of the linearized equation beyond. The lower side
/// follows by reflection.
#[derive(Debug, Clone)]
pub struct CalibrationField {
    nodes: Vec<Node>,
    tail_a: f64,
    tail_b: f64,
    tol: f64,
}

/// Where a point sits in the foliation: the leaf scale λ and the foot on
/// the base leaf with p = λ·foot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LeafPoint {
    pub scale: f64,
    pub foot: [f64; 2],
    pub side: Side,
    /// Tangent angle α of the leaf at the foot.
    pub angle: f64,
}

impl CalibrationField {
    pub fn new(tol: f64) -> Result<Self, CalibrationError> {
        if !(tol > 0.0 && tol <= 1e-8) {
            return Err(CalibrationError::InvalidInput(format!(
                "field tolerance must lie in (0, 1e-8], got {tol}"
            )));
        }
        let path = integrate_upper(tol, |st| st.y[0] >= TABLE_EXTENT)?;
        let nodes: Vec<Node> = path
            .windows(2)
            .map(|w| Node {
                t: w[0].t,
                s: w[0].y[0],
                w: w[0].y[1],
                beta: w[0].y[2],
                step: w[1].t - w[0].t,
            })
            .chain(path.last().map(|st| Node {
                t: st.t,
                s: st.y[0],
                w: st.y[1],
                beta: st.y[2],
                step: 0.0,
            }))
            .collect();
        if nodes.windows(2).any(|w| w[1].ratio() >= w[0].ratio()) {
            return Err(CalibrationError::Integration(
                "leaf polar angle is not monotone; the homothetic family is not a foliation".into(),
            ));
        }
        let last = nodes.last().unwrap();
        let (s, w) = (last.s, last.w);
        let slope = last.beta.tan();
        let tail_b = -s * (2.0 * w * s * s + slope * s * s * s);
        let tail_a = w * s * s - tail_b / s;
        Ok(Self {
            nodes,
            tail_a,
            tail_b,
            tol,
        })
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Coefficients (a, b) of the far-field branch w = a s⁻² + b s⁻³.
    pub fn tail(&self) -> (f64, f64) {
        (self.tail_a, self.tail_b)
    }

    pub fn table_len(&self) -> usize {
        self.nodes.len()
    }

    /// Point (s, w) and tangent angle β on the upper base leaf where w/s = q.
    fn upper_point(&self, q: f64) -> Result<(f64, f64, f64), CalibrationError> {
        let first = self.nodes[0];
        let last = *self.nodes.last().unwrap();
        if q > first.ratio() {
            // series region near the v-axis: solve v = λ(1 + (3/8)x² − (15/512)x⁴)
            // with x = u/λ for the unit-distance leaf through the direction q
            let p = from_cone(1.0, q);
            let (u, v) = (p.x, p.y);
            let mut lambda = 0.5 * (v + (v * v - 1.5 * u * u).max(0.0).sqrt());
            for _ in 0..3 {
                let x = u / lambda;
                let f = lambda + 0.375 * u * x - 15.0 / 512.0 * u * x.powi(3) - v;
                let df = 1.0 - 0.375 * x * x + 45.0 / 512.0 * x.powi(4);
                lambda -= f / df;
            }
            let x = u / lambda;
            let slope = 0.75 * x - 15.0 / 128.0 * x.powi(3);
            let alpha = slope.atan();
            let (s, w) = to_cone(Point::new(x, (v / lambda).max(0.0)));
            return Ok((s, w, alpha - std::f64::consts::FRAC_PI_4));
        }
        if q <= last.ratio() {
            // far field: a s⁻³ + b s⁻⁴ = q, decreasing in s beyond the table
            let g = |s: f64| self.tail_a / s.powi(3) + self.tail_b / s.powi(4) - q;
            let mut hi = last.s * 2.0;
            while g(hi) > 0.0 {
                hi *= 2.0;
                if !hi.is_finite() {
                    return Err(CalibrationError::Degenerate(format!(
                        "direction {q:e} too close to the cone"
                    )));
                }
            }
            let s = if g(last.s) <= 0.0 {
                last.s
            } else {
                find_root(g, &Bracket::new(last.s, hi, 1e-14 * hi)?)?
            };
            let w = self.tail_a / (s * s) + self.tail_b / s.powi(3);
            let dw = -2.0 * self.tail_a / s.powi(3) - 3.0 * self.tail_b / s.powi(4);
            return Ok((s, w, dw.atan()));
        }
        // table: last node with ratio ≥ q, then a partial step from it
        let idx = self.nodes.partition_point(|n| n.ratio() >= q) - 1;
        let node = self.nodes[idx];
        let y0 = [node.s, node.w, node.beta];
        let advance = |h: f64| dopri_step(&leaf_field, node.t, &y0, h).0;
        let h = if node.ratio() == q {
            0.0
        } else {
            find_root(
                |h| {
                    let y = advance(h);
                    y[1] / y[0] - q
                },
                &Bracket::new(0.0, node.step, 1e-15 * node.step.max(1.0))?,
            )?
        };
        let y = if h == 0.0 { y0.to_vec() } else { advance(h) };
        Ok((y[0], y[1], y[2]))
    }

    /// Foliation coordinates of an off-diagonal point within radius 2.
    pub fn leaf_through(&self, p: Point) -> Result<LeafPoint, CalibrationError> {
        check_domain(p)?;
        let side = Side::of(p).ok_or_else(|| {
            CalibrationError::Degenerate(format!(
                "({}, {}) lies on the cone; X is the cone normal there",
                p.x, p.y
            ))
        })?;
        let upper = match side {
            Side::AboveDiagonal => p,
            Side::BelowDiagonal => mirror(p),
        };
        let (sp, wp) = to_cone(upper);
        let (s, w, beta) = self.upper_point(wp / sp)?;
        let foot_upper = from_cone(s, w);
        let scale = sp / s;
        let alpha = beta + std::f64::consts::FRAC_PI_4;
        let (foot, angle) = match side {
            Side::AboveDiagonal => (foot_upper, alpha),
            Side::BelowDiagonal => (mirror(foot_upper), std::f64::consts::FRAC_PI_2 - alpha),
        };
        Ok(LeafPoint {
            scale,
            foot: [foot.x, foot.y],
            side,
            angle,
        })
    }

    /// X at p: the unit normal of the leaf through p, pointing away from N;
    /// the cone normal (−1, 1)/√2 on the diagonal.
    pub fn field_x(&self, p: Point) -> Result<Point, CalibrationError> {
        check_domain(p)?;
        let Some(side) = Side::of(p) else {
            return Ok(Point::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2));
        };
        let upper = match side {
            Side::AboveDiagonal => p,
            Side::BelowDiagonal => mirror(p),
        };
        let (sp, wp) = to_cone(upper);
        let (_, _, beta) = self.upper_point(wp / sp)?;
        // −sin β e_s + cos β e_w
        let (sb, cb) = beta.sin_cos();
        let x_upper = Point::new(-sb - cb, -sb + cb) * FRAC_1_SQRT_2;
        Ok(match side {
            Side::AboveDiagonal => x_upper,
            Side::BelowDiagonal => -mirror(x_upper),
        })
    }
}

impl UnitField for CalibrationField {
    fn value(&self, p: Point) -> Result<Point, CalibrationError> {
        self.field_x(p)
    }
}

fn check_domain(p: Point) -> Result<(), CalibrationError> {
    if !(p.x >= 0.0 && p.y >= 0.0 && p.x.is_finite() && p.y.is_finite()) {
        return Err(CalibrationError::OutOfDomain(format!(
            "({}, {}) is outside the closed quadrant",
            p.x, p.y
        )));
    }
    if p.norm() > LEAF_RADIUS * (1.0 + 1e-12) {
        return Err(CalibrationError::OutOfDomain(format!(
            "({}, {}) is beyond radius {LEAF_RADIUS}",
            p.x, p.y
        )));
    }
    if p.norm() == 0.0 {
        return Err(CalibrationError::Degenerate("the cone vertex".into()));
    }
    Ok(())
}

/// |div X + 3X_u/u + 3X_v/v| by central differences with spacing h: the
/// divergence in R⁸ of the O(4)×O(4)-invariant extension of X.
pub fn divergence_residual<F: UnitField + ?Sized>(
    p: Point,
    field: &F,
    h: f64,
) -> Result<f64, CalibrationError> {
    if !(h > 0.0) {
        return Err(CalibrationError::InvalidInput(
            "stencil spacing must be positive".into(),
        ));
    }
    if p.x < 2.0 * h || p.y < 2.0 * h || p.norm() + 2.0 * h > LEAF_RADIUS {
        return Err(CalibrationError::OutOfDomain(format!(
            "stencil of spacing {h} around ({}, {}) leaves the domain",
            p.x, p.y
        )));
    }
    let du = Point::new(h, 0.0);
    let dv = Point::new(0.0, h);
    let x_e = field.value(p + du)?;
    let x_w = field.value(p - du)?;
    let x_n = field.value(p + dv)?;
    let x_s = field.value(p - dv)?;
    let x = field.value(p)?;
    let div = (x_e.x - x_w.x) / (2.0 * h) + (x_n.y - x_s.y) / (2.0 * h);
    Ok((div + 3.0 * x.x / p.x + 3.0 * x.y / p.y).abs())
}

/// Interior sample points for divergence checks: polar grid avoiding the
/// axes and a wedge around the cone where X is only C^{1,1/3}.
pub fn interior_samples(radii: usize, angles: usize) -> Vec<Point> {
    use std::f64::consts::FRAC_PI_4;
    let mut out = Vec::with_capacity(radii * angles * 2);
    for i in 0..radii {
        let r = 0.3 + 1.5 * i as f64 / (radii.max(2) - 1) as f64;
        for j in 0..angles {
            let f = j as f64 / (angles.max(2) - 1) as f64;
            let below = 0.1 + f * (FRAC_PI_4 - 0.05 - 0.1);
            for theta in [below, std::f64::consts::FRAC_PI_2 - below] {
                out.push(Point::new(r * theta.cos(), r * theta.sin()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibration::integrate_base_leaf;
    use std::sync::OnceLock;

    pub(crate) fn field() -> &'static CalibrationField {
        static FIELD: OnceLock<CalibrationField> = OnceLock::new();
        FIELD.get_or_init(|| CalibrationField::new(DEFAULT_FIELD_TOL).unwrap())
    }

    #[test]
    fn diagonal_value_is_the_cone_normal() {
        let x = field().field_x(Point::new(0.5, 0.5)).unwrap();
        assert_eq!(x, Point::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2));
        assert!(field().leaf_through(Point::new(0.5, 0.5)).is_err());
        assert!(matches!(
            field().field_x(Point::new(1.5, 1.5)),
            Err(CalibrationError::OutOfDomain(_))
        ));
    }

    #[test]
    fn unit_norm_and_reflection_law() {
        for p in interior_samples(5, 7) {
            let x = field().field_x(p).unwrap();
            assert!((x.norm() - 1.0).abs() < 1e-14);
            let y = field().field_x(mirror(p)).unwrap();
            assert!((y + mirror(x)).norm() < 1e-14);
        }
    }

    #[test]
    fn points_on_the_base_leaf() {
        let leaf = integrate_base_leaf(Side::AboveDiagonal, 1e-12).unwrap();
        for p in leaf.curve.vertices().iter().skip(1).step_by(17) {
            let lp = field().leaf_through(*p).unwrap();
            assert!((lp.scale - 1.0).abs() < 1e-9, "{p:?}: {}", lp.scale);
            if p.norm() <= 1.0 {
                let lp2 = field().leaf_through(*p * 2.0).unwrap();
                assert!((lp2.scale - 2.0).abs() < 2e-9);
            }
        }
    }

    #[test]
    fn foot_reconstructs_the_point() {
        let pts = [
            Point::new(0.3, 1.2),
            Point::new(0.9, 0.91),
            Point::new(1e-5, 0.8),
            Point::new(1.7, 0.2),
            Point::new(0.7, 0.70001),
        ];
        for p in pts {
            let lp = field().leaf_through(p).unwrap();
            let foot = Point::new(lp.foot[0], lp.foot[1]);
            assert!((p - foot * lp.scale).norm() <= 1e-9, "{p:?}");
            // X is orthogonal to the leaf tangent at the foot
            let tangent = Point::new(lp.angle.cos(), lp.angle.sin());
            assert!(field().field_x(p).unwrap().dot(&tangent).abs() < 1e-9);
        }
    }

    #[test]
    fn scale_is_monotone_across_the_diagonal() {
        let r = 1.0;
        let mut prev = 0.0;
        for j in 1..200 {
            let theta = std::f64::consts::FRAC_PI_4 + j as f64 * 0.0039;
            let lp = field()
                .leaf_through(Point::new(r * theta.cos(), r * theta.sin()))
                .unwrap();
            // leaves shrink toward the vertex as they approach the cone
            assert!(lp.scale > prev);
            prev = lp.scale;
        }
    }

    #[test]
    fn radial_field_divergence() {
        for p in interior_samples(4, 5) {
            let res = divergence_residual(p, &RadialField, 1e-3).unwrap();
            assert!((res - 7.0 / p.norm()).abs() < 1e-4);
        }
    }

    #[test]
    fn field_is_divergence_free() {
        let pts = interior_samples(6, 6);
        let coarse = pts
            .iter()
            .map(|p| divergence_residual(*p, field(), 1e-3).unwrap())
            .fold(0.0, f64::max);
        let fine = pts
            .iter()
            .map(|p| divergence_residual(*p, field(), 5e-4).unwrap())
            .fold(0.0, f64::max);
        assert!(coarse <= 1e-3, "{coarse}");
        let ratio = coarse / fine;
        assert!((ratio - 4.0).abs() <= 0.5, "{coarse} {fine} {ratio}");
    }

    #[test]
    fn stencil_must_fit() {
        assert!(divergence_residual(Point::new(1e-3, 1.0), &RadialField, 1e-3).is_err());
    }
}
