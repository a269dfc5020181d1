use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use super::{GeometryError, Point};

/// Cutoff profile χ for the bump φ(a) = a²χ(a).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CutoffProfile {
    /// χ = 1 on [0, υ], quintic smootherstep from 1 down to 0 on [υ, 2υ],
    /// zero beyond. C² everywhere.
    #[default]
    Smootherstep,
}

impl CutoffProfile {
    fn value(self, a: f64, upsilon: f64) -> f64 {
        match self {
            CutoffProfile::Smootherstep => {
                if a <= upsilon {
                    1.0
                } else if a >= 2.0 * upsilon {
                    0.0
                } else {
                    let x = (a - upsilon) / upsilon;
                    1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
                }
            }
        }
    }

    fn derivative(self, a: f64, upsilon: f64) -> f64 {
        match self {
            CutoffProfile::Smootherstep => {
                if a <= upsilon || a >= 2.0 * upsilon {
                    0.0
                } else {
                    let x = (a - upsilon) / upsilon;
                    -30.0 * x * x * (1.0 - x) * (1.0 - x) / upsilon
                }
            }
        }
    }
}

/// Deformation of the unit ball: boundary radius 1 + K·φ(d) where d is the
/// distance to the cone's trace on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainParams {
    k: f64,
    upsilon: f64,
    chi: CutoffProfile,
}

impl Default for DomainParams {
    fn default() -> Self {
        Self {
            k: 8.0,
            upsilon: 0.1,
            chi: CutoffProfile::Smootherstep,
        }
    }
}

impl DomainParams {
    pub fn new(k: f64, upsilon: f64) -> Result<Self, GeometryError> {
        Self::with_profile(k, upsilon, CutoffProfile::default())
    }

    pub fn with_profile(k: f64, upsilon: f64, chi: CutoffProfile) -> Result<Self, GeometryError> {
        if !k.is_finite() {
            return Err(GeometryError::InvalidInput(format!(
                "K must be finite, got {k}"
            )));
        }
        if !(upsilon > 0.0 && upsilon <= 0.3) {
            return Err(GeometryError::InvalidInput(format!(
                "upsilon must lie in (0, 0.3], got {upsilon}"
            )));
        }
        Ok(Self { k, upsilon, chi })
    }

    /// The undeformed unit ball (K = 0) with the same cutoff scale.
    pub fn undeformed(&self) -> Self {
        Self { k: 0.0, ..*self }
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn upsilon(&self) -> f64 {
        self.upsilon
    }

    pub fn chi(&self) -> CutoffProfile {
        self.chi
    }

    pub fn cutoff(&self, a: f64) -> f64 {
        self.chi.value(a.abs(), self.upsilon)
    }

    /// Location d* of the bump's interior maximum in (υ, 2υ).
    pub fn bump_crest(&self) -> f64 {
        // φ′ changes sign once on (υ, 2υ); golden-section on φ
        let (mut lo, mut hi) = (self.upsilon, 2.0 * self.upsilon);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - g * (hi - lo);
        let mut x2 = lo + g * (hi - lo);
        let (mut f1, mut f2) = (bump(x1, self), bump(x2, self));
        while hi - lo > 1e-13 * self.upsilon {
            if f1 < f2 {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = bump(x2, self);
            } else {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = bump(x1, self);
            }
        }
        0.5 * (lo + hi)
    }
}

/// Polar angle θ ∈ [0, π/2] in the (u, v) quadrant; θ = π/4 is the cone.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct AngularCoordinate(f64);

impl AngularCoordinate {
    pub fn new(theta: f64) -> Result<Self, GeometryError> {
        if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&theta) {
            return Err(GeometryError::InvalidInput(format!(
                "angle {theta} outside [0, π/2]"
            )));
        }
        Ok(Self(theta))
    }

    pub fn cone() -> Self {
        Self(FRAC_PI_4)
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// The u ↔ v mirror image θ ↦ π/2 − θ.
    pub fn mirrored(self) -> Self {
        Self(std::f64::consts::FRAC_PI_2 - self.0)
    }

    pub fn unit(self) -> Point {
        Point::new(self.0.cos(), self.0.sin())
    }
}

/// Euclidean distance in R⁸ from a point of S⁷ at quadrant angle θ to the
/// cone's trace {|x′| = |x″| = 1/√2}. Independent of the S³ directions.
pub fn cross_section_distance(theta: AngularCoordinate) -> f64 {
    2.0 * ((theta.0 - FRAC_PI_4) / 2.0).sin().abs()
}

fn cross_section_distance_derivative(theta: AngularCoordinate) -> f64 {
    let x = theta.0 - FRAC_PI_4;
    (x / 2.0).cos() * x.signum()
}

/// φ(a) = a²χ(a).
pub fn bump(a: f64, params: &DomainParams) -> f64 {
    a * a * params.cutoff(a)
}

pub fn bump_derivative(a: f64, params: &DomainParams) -> f64 {
    let a = a.abs();
    2.0 * a * params.cutoff(a) + a * a * params.chi.derivative(a, params.upsilon)
}

/// r(θ) = 1 + K·φ(d(θ)).
pub fn boundary_radius(theta: AngularCoordinate, params: &DomainParams) -> f64 {
    1.0 + params.k * bump(cross_section_distance(theta), params)
}

/// dr/dθ of the boundary curve.
pub fn boundary_radius_derivative(theta: AngularCoordinate, params: &DomainParams) -> f64 {
    params.k
        * bump_derivative(cross_section_distance(theta), params)
        * cross_section_distance_derivative(theta)
}

pub fn boundary_point(theta: AngularCoordinate, params: &DomainParams) -> Point {
    theta.unit() * boundary_radius(theta, params)
}

/// Outward unit normal of the polar curve r(θ), proportional to r·e_r − r′·e_θ.
pub fn boundary_normal(theta: AngularCoordinate, params: &DomainParams) -> Point {
    let r = boundary_radius(theta, params);
    let dr = boundary_radius_derivative(theta, params);
    let (s, c) = theta.0.sin_cos();
    let e_r = Point::new(c, s);
    let e_theta = Point::new(-s, c);
    (e_r * r - e_theta * dr).normalize()
}

/// Arclength density |d(boundary point)/dθ| = √(r² + r′²).
pub fn boundary_speed(theta: AngularCoordinate, params: &DomainParams) -> f64 {
    boundary_radius(theta, params).hypot(boundary_radius_derivative(theta, params))
}
