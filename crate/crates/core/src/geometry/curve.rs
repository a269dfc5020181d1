use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point, ORBIT_FACTOR};
use crate::numerics::gauss_legendre_4;

/// Component of the open quadrant minus the diagonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// v > u
    AboveDiagonal,
    /// u > v
    BelowDiagonal,
}

impl Side {
    pub fn opposite(self) -> Self {
        match self {
            Side::AboveDiagonal => Side::BelowDiagonal,
            Side::BelowDiagonal => Side::AboveDiagonal,
        }
    }

    pub fn of(p: Point) -> Option<Self> {
        if p.y > p.x {
            Some(Side::AboveDiagonal)
        } else if p.x > p.y {
            Some(Side::BelowDiagonal)
        } else {
            None
        }
    }
}

/// Swap u and v.
pub fn mirror(p: Point) -> Point {
    Point::new(p.y, p.x)
}

/// Polyline in the closed (u, v) quadrant generating an O(4)×O(4)-invariant
/// hypersurface of R⁸. `side` records which component of the quadrant minus
/// the diagonal the enclosed set lies in.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingCurve {
    vertices: Vec<Point>,
    arclength: Vec<f64>,
    side: Side,
}

impl GeneratingCurve {
    pub fn new(vertices: Vec<Point>, side: Side) -> Result<Self, GeometryError> {
        if let Some(p) = vertices
            .iter()
            .find(|p| !(p.x >= 0.0 && p.y >= 0.0 && p.x.is_finite() && p.y.is_finite()))
        {
            return Err(GeometryError::InvalidInput(format!(
                "vertex ({}, {}) outside the closed quadrant",
                p.x, p.y
            )));
        }
        let mut arclength = Vec::with_capacity(vertices.len());
        let mut total = 0.0;
        for (i, p) in vertices.iter().enumerate() {
            if i > 0 {
                let ds = (p - vertices[i - 1]).norm();
                if ds == 0.0 {
                    return Err(GeometryError::InvalidInput(format!(
                        "repeated vertex at index {i}"
                    )));
                }
                total += ds;
            }
            arclength.push(total);
        }
        Ok(Self {
            vertices,
            arclength,
            side,
        })
    }

    pub fn empty(side: Side) -> Self {
        Self {
            vertices: Vec::new(),
            arclength: Vec::new(),
            side,
        }
    }

    /// The cone segment u = v from the vertex out to `radius`.
    pub fn cone_segment(radius: f64, segments: usize) -> Result<Self, GeometryError> {
        if !(radius > 0.0) || segments == 0 {
            return Err(GeometryError::InvalidInput(
                "cone segment needs a positive radius and at least one segment".into(),
            ));
        }
        let c = radius / 2f64.sqrt();
        let vertices = (0..=segments)
            .map(|i| {
                let t = c * i as f64 / segments as f64;
                Point::new(t, t)
            })
            .collect();
        Self::new(vertices, Side::BelowDiagonal)
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn arclength(&self) -> &[f64] {
        &self.arclength
    }

    pub fn length(&self) -> f64 {
        self.arclength.last().copied().unwrap_or(0.0)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn first(&self) -> Option<Point> {
        self.vertices.first().copied()
    }

    pub fn last(&self) -> Option<Point> {
        self.vertices.last().copied()
    }

    /// Homothety p ↦ λp.
    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| p * lambda).collect(),
            arclength: self.arclength.iter().map(|s| s * lambda).collect(),
            side: self.side,
        }
    }

    /// u ↔ v reflection with the side flag swapped.
    pub fn mirrored(&self) -> Self {
        Self {
            vertices: self.vertices.iter().map(|p| mirror(*p)).collect(),
            arclength: self.arclength.clone(),
            side: self.side.opposite(),
        }
    }

    pub fn reversed(&self) -> Self {
        let vertices: Vec<Point> = self.vertices.iter().rev().copied().collect();
        Self::new(vertices, self.side).expect("reversal keeps a valid curve valid")
    }

    pub fn segments(&self) -> impl Iterator<Item = (Point, Point)> + '_ {
        self.vertices.windows(2).map(|w| (w[0], w[1]))
    }
}

/// Area of the hypersurface generated by `curve`: (2π²)² ∫ u³v³ ds.
/// The integrand is a degree-6 polynomial on each segment, so the
/// four-point Gauss rule is exact per segment.
pub fn weighted_area(curve: &GeneratingCurve) -> f64 {
    let (nodes, weights) = gauss_legendre_4();
    let mut total = 0.0;
    for (a, b) in curve.segments() {
        let d = b - a;
        let len = d.norm();
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let p = a + d * *x;
            acc += w * (p.x * p.y).powi(3);
        }
        total += acc * len;
    }
    ORBIT_FACTOR * total
}

/// Simple closed polygon in the quadrant, stored counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedRegion {
    boundary: Vec<Point>,
}

impl ReducedRegion {
    /// Validates the loop (closing edge implied) and orients it
    /// counter-clockwise. Fewer than three vertices gives a degenerate region.
    pub fn new(mut boundary: Vec<Point>) -> Result<Self, GeometryError> {
        if boundary.len() >= 2 && boundary.first() == boundary.last() {
            boundary.pop();
        }
        if let Some(p) = boundary
            .iter()
            .find(|p| !(p.x >= 0.0 && p.y >= 0.0 && p.x.is_finite() && p.y.is_finite()))
        {
            return Err(GeometryError::InvalidInput(format!(
                "region vertex ({}, {}) outside the closed quadrant",
                p.x, p.y
            )));
        }
        if boundary.len() < 3 {
            return Ok(Self { boundary });
        }
        for i in 0..boundary.len() {
            if boundary[i] == boundary[(i + 1) % boundary.len()] {
                return Err(GeometryError::InvalidInput(format!(
                    "repeated region vertex at index {i}"
                )));
            }
        }
        if let Some((i, j)) = find_self_intersection(&boundary) {
            return Err(GeometryError::InvalidInput(format!(
                "self-intersecting boundary: edges {i} and {j} cross"
            )));
        }
        if signed_area(&boundary) < 0.0 {
            boundary.reverse();
        }
        Ok(Self { boundary })
    }

    /// Concatenates curve pieces into one loop; consecutive pieces may share
    /// their joining vertex.
    pub fn from_pieces(pieces: &[GeneratingCurve]) -> Result<Self, GeometryError> {
        let mut boundary: Vec<Point> = Vec::new();
        for piece in pieces {
            for p in piece.vertices() {
                if boundary.last() != Some(p) {
                    boundary.push(*p);
                }
            }
        }
        Self::new(boundary)
    }

    pub fn boundary(&self) -> &[Point] {
        &self.boundary
    }

    pub fn is_degenerate(&self) -> bool {
        self.boundary.len() < 3
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        Self {
            boundary: self.boundary.iter().map(|p| p * lambda).collect(),
        }
    }
}

fn signed_area(poly: &[Point]) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| {
            let a = poly[i];
            let b = poly[(i + 1) % n];
            a.x * b.y - b.x * a.y
        })
        .sum::<f64>()
        * 0.5
}

/// Volume of the O(4)×O(4) orbit of the region: (2π²)² ∬ u³v³ du dv,
/// evaluated as the boundary integral ∮ (u⁴v³/4) dv (exact per edge).
pub fn weighted_volume(region: &ReducedRegion) -> f64 {
    if region.is_degenerate() {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre_4();
    let poly = &region.boundary;
    let n = poly.len();
    let mut total = 0.0;
    for i in 0..n {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        let d = b - a;
        if d.y == 0.0 {
            continue;
        }
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(&weights) {
            let p = a + d * *x;
            acc += w * p.x.powi(4) * p.y.powi(3);
        }
        total += 0.25 * acc * d.y;
    }
    ORBIT_FACTOR * total.max(0.0)
}

fn orientation(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn on_segment(a: Point, b: Point, p: Point) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

fn segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orientation(q1, q2, p1);
    let d2 = orientation(q1, q2, p2);
    let d3 = orientation(p1, p2, q1);
    let d4 = orientation(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

/// Uniform-grid broad phase followed by exact pairwise tests on non-adjacent
/// edges.
fn find_self_intersection(poly: &[Point]) -> Option<(usize, usize)> {
    let n = poly.len();
    let edge = |i: usize| (poly[i], poly[(i + 1) % n]);
    let (mut min, mut max) = (poly[0], poly[0]);
    let mut total_len = 0.0;
    for i in 0..n {
        let (a, b) = edge(i);
        min = min.inf(&a);
        max = max.sup(&a);
        total_len += (b - a).norm();
    }
    let extent = (max - min).norm().max(f64::MIN_POSITIVE);
    let cell = (2.0 * total_len / n as f64).max(extent * 1e-6);
    let key = |x: f64, y: f64| (((x - min.x) / cell) as i64, ((y - min.y) / cell) as i64);

    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for i in 0..n {
        let (a, b) = edge(i);
        let (x0, y0) = key(a.x.min(b.x), a.y.min(b.y));
        let (x1, y1) = key(a.x.max(b.x), a.y.max(b.y));
        for gx in x0..=x1 {
            for gy in y0..=y1 {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let adjacent = |i: usize, j: usize| i == j || (i + 1) % n == j || (j + 1) % n == i;
    let mut cells: Vec<_> = grid.into_iter().collect();
    cells.sort_by_key(|(k, _)| *k);
    for (_, edges) in cells {
        for (a, &i) in edges.iter().enumerate() {
            for &j in &edges[a + 1..] {
                if adjacent(i, j) {
                    continue;
                }
                let (p1, p2) = edge(i);
                let (q1, q2) = edge(j);
                if segments_intersect(p1, p2, q1, q2) {
                    return Some((i.min(j), i.max(j)));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    #[test]
    fn empty_curve_has_zero_area() {
        assert_eq!(
            weighted_area(&GeneratingCurve::empty(Side::BelowDiagonal)),
            0.0
        );
    }

    #[test]
    fn cone_segment_area() {
        let cone = GeneratingCurve::cone_segment(1.0, 7).unwrap();
        assert_relative_eq!(
            weighted_area(&cone),
            PI.powi(4) / 14.0,
            max_relative = 1e-14
        );
        // independent check: Simpson on t⁶/8 over [0, 1]
        let n = 2001;
        let h = 1.0 / (n - 1) as f64;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 * h).powi(6) / 8.0).collect();
        let simpson = crate::numerics::integrate_samples(&samples, h).unwrap();
        assert_relative_eq!(simpson, 1.0 / 56.0, max_relative = 1e-10);
        let doubled = GeneratingCurve::cone_segment(2.0, 7).unwrap();
        assert_relative_eq!(
            weighted_area(&doubled),
            128.0 * PI.powi(4) / 14.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn area_is_homogeneous_of_degree_seven() {
        let vertices: Vec<Point> = (0..50)
            .map(|i| {
                let t = i as f64 / 49.0;
                Point::new(0.2 + t, 0.1 + t * t)
            })
            .collect();
        let curve = GeneratingCurve::new(vertices, Side::BelowDiagonal).unwrap();
        for &lambda in &[0.3, 1.7, 2.0] {
            assert_relative_eq!(
                weighted_area(&curve.scaled(lambda)),
                lambda.powi(7) * weighted_area(&curve),
                max_relative = 1e-13
            );
        }
        assert_relative_eq!(
            weighted_area(&curve.mirrored()),
            weighted_area(&curve),
            max_relative = 1e-14
        );
    }

    #[test]
    fn curve_validation() {
        assert!(GeneratingCurve::new(vec![Point::new(-0.1, 0.0)], Side::BelowDiagonal).is_err());
        let p = Point::new(0.5, 0.5);
        assert!(GeneratingCurve::new(vec![p, p], Side::BelowDiagonal).is_err());
    }

    fn sector_below_diagonal(n: usize) -> ReducedRegion {
        let mut boundary = vec![Point::new(0.0, 0.0)];
        for i in 0..=n {
            let t = FRAC_PI_4 * i as f64 / n as f64;
            boundary.push(Point::new(t.cos(), t.sin()));
        }
        ReducedRegion::new(boundary).unwrap()
    }

    #[test]
    fn degenerate_region_has_zero_volume() {
        let r = ReducedRegion::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 1.0)]).unwrap();
        assert_eq!(weighted_volume(&r), 0.0);
    }

    #[test]
    fn sector_volume_against_closed_form_and_monte_carlo() {
        // ∬ over the quarter disk of u³v³ = (1/8)(1/12); half of it below the diagonal
        let exact = ORBIT_FACTOR / 192.0;
        assert_relative_eq!(exact, PI.powi(4) / 48.0, max_relative = 1e-15);
        let volume = weighted_volume(&sector_below_diagonal(20_000));
        assert_relative_eq!(volume, exact, max_relative = 1e-8);

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples = 400_000;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..samples {
            let (u, v): (f64, f64) = (rng.gen(), rng.gen());
            let f = if u * u + v * v <= 1.0 && v < u {
                (u * v).powi(3)
            } else {
                0.0
            };
            sum += f;
            sum2 += f * f;
        }
        let mean = sum / samples as f64;
        let sigma = ((sum2 / samples as f64 - mean * mean) / samples as f64).sqrt();
        assert!(
            (ORBIT_FACTOR * mean - volume).abs() < 4.0 * ORBIT_FACTOR * sigma,
            "MC {} vs {}",
            ORBIT_FACTOR * mean,
            volume
        );
    }

    #[test]
    fn volume_is_homogeneous_and_orientation_free() {
        let region = sector_below_diagonal(500);
        let v = weighted_volume(&region);
        assert_relative_eq!(
            weighted_volume(&region.scaled(1.5)),
            1.5f64.powi(8) * v,
            max_relative = 1e-13
        );
        let mut reversed = region.boundary().to_vec();
        reversed.reverse();
        assert_relative_eq!(
            weighted_volume(&ReducedRegion::new(reversed).unwrap()),
            v,
            max_relative = 1e-15
        );
    }

    #[test]
    fn self_intersection_is_rejected() {
        let bow_tie = vec![
            Point::new(0.0, 0.0),
            Point::new(1.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(0.0, 1.0),
        ];
        assert!(ReducedRegion::new(bow_tie).is_err());
    }
}
