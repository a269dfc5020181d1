use super::NumericsError;

pub const DEFAULT_ROOT_TOL: f64 = 1e-12;

const MAX_ITERATIONS: usize = 200;

/// Search interval `[lo, hi]` with the absolute tolerance on the root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
    tolerance: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64, tolerance: f64) -> Result<Self, NumericsError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(NumericsError::InvalidInput(format!(
                "bracket requires lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(tolerance > 0.0) {
            return Err(NumericsError::InvalidInput(format!(
                "bracket tolerance must be positive, got {tolerance}"
            )));
        }
        Ok(Self { lo, hi, tolerance })
    }

    pub fn with_default_tol(lo: f64, hi: f64) -> Result<Self, NumericsError> {
        Self::new(lo, hi, DEFAULT_ROOT_TOL)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

/// Brent's method: inverse quadratic interpolation and secant steps guarded by
/// bisection. The returned root always lies inside the bracket.
pub fn find_root<F>(f: F, bracket: &Bracket) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(NumericsError::Bracket {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
        });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITERATIONS {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * bracket.tolerance;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if !fb.is_finite() {
            return Err(NumericsError::InvalidInput(format!(
                "function is not finite at {b}"
            )));
        }
    }
    Err(NumericsError::Convergence {
        what: "Brent root finder",
        iterations: MAX_ITERATIONS,
        residual: fb.abs(),
    })
}
