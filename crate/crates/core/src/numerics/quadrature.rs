use super::NumericsError;

/// Composite quadrature of uniformly spaced samples.
///
/// Simpson's rule when the number of intervals is even. With an odd number
/// of intervals (≥ 3) the last three intervals use Simpson's 3/8 rule, which
/// keeps fourth order; two samples fall back to the trapezoid rule.
pub fn integrate_samples(values: &[f64], step: f64) -> Result<f64, NumericsError> {
    let n = values.len();
    if n < 2 {
        return Err(NumericsError::InvalidInput(format!(
            "quadrature needs at least 2 samples, got {n}"
        )));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(NumericsError::InvalidInput(format!(
            "quadrature step must be positive, got {step}"
        )));
    }
    if n == 2 {
        return Ok(0.5 * step * (values[0] + values[1]));
    }
    let intervals = n - 1;
    if intervals.is_multiple_of(2) {
        return Ok(simpson(values, step));
    }
    let split = n - 4;
    let head = if split >= 2 {
        simpson(&values[..=split], step)
    } else {
        0.0
    };
    let tail = &values[split..];
    let three_eighths = 3.0 * step / 8.0 * (tail[0] + 3.0 * tail[1] + 3.0 * tail[2] + tail[3]);
    Ok(head + three_eighths)
}

fn simpson(values: &[f64], step: f64) -> f64 {
    let n = values.len();
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    step / 3.0 * (values[0] + values[n - 1] + 4.0 * odd + 2.0 * even)
}

/// Fourth-order finite-difference first derivative of uniformly spaced
/// samples: centered five-point stencil inside, one-sided five-point stencils
/// at the two nodes nearest each end.
pub fn derivative_samples(values: &[f64], step: f64) -> Result<Vec<f64>, NumericsError> {
    let n = values.len();
    if n < 5 {
        return Err(NumericsError::InvalidInput(format!(
            "derivative stencil needs at least 5 samples, got {n}"
        )));
    }
    let f = values;
    let h12 = 12.0 * step;
    let mut out = vec![0.0; n];
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) / h12;
    }
    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / h12;
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / h12;
    let m = n - 1;
    out[m] =
        (25.0 * f[m] - 48.0 * f[m - 1] + 36.0 * f[m - 2] - 16.0 * f[m - 3] + 3.0 * f[m - 4]) / h12;
    out[m - 1] = (3.0 * f[m] + 10.0 * f[m - 1] - 18.0 * f[m - 2] + 6.0 * f[m - 3] - f[m - 4]) / h12;
    Ok(out)
}

/// Four-point Gauss–Legendre rule on [0, 1]: (nodes, weights). Exact for
/// polynomials of degree ≤ 7.
pub fn gauss_legendre_4() -> ([f64; 4], [f64; 4]) {
    let a = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let b = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let wa = (18.0 + 30f64.sqrt()) / 36.0;
    let wb = (18.0 - 30f64.sqrt()) / 36.0;
    (
        [
            0.5 * (1.0 - b),
            0.5 * (1.0 - a),
            0.5 * (1.0 + a),
            0.5 * (1.0 + b),
        ],
        [0.5 * wb, 0.5 * wa, 0.5 * wa, 0.5 * wb],
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sample(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> (Vec<f64>, f64) {
        let h = (b - a) / (n - 1) as f64;
        ((0..n).map(|i| f(a + i as f64 * h)).collect(), h)
    }

    #[test]
    fn constant_is_exact() {
        let (v, h) = sample(11, 0.0, 1.0, |_| 1.0);
        assert!((integrate_samples(&v, h).unwrap() - 1.0).abs() < 1e-15);
        let (v, h) = sample(2, 0.0, 1.0, |_| 1.0);
        assert_eq!(integrate_samples(&v, h).unwrap(), 1.0);
    }

    #[test]
    fn sixth_power() {
        let (v, h) = sample(1001, 0.0, 1.0, |t| t.powi(6));
        assert!((integrate_samples(&v, h).unwrap() - 1.0 / 7.0).abs() < 1e-8);
    }

    #[test]
    fn sine_over_half_period() {
        let (v, h) = sample(1001, 0.0, PI, f64::sin);
        assert!((integrate_samples(&v, h).unwrap() - 2.0).abs() < 1e-8);
        // even sample count takes the 3/8 branch and stays fourth order
        let (v, h) = sample(1000, 0.0, PI, f64::sin);
        assert!((integrate_samples(&v, h).unwrap() - 2.0).abs() < 1e-8);
    }

    #[test]
    fn too_few_samples() {
        assert!(integrate_samples(&[1.0], 0.1).is_err());
        assert!(derivative_samples(&[1.0; 4], 0.1).is_err());
    }

    #[test]
    fn derivative_of_exponential() {
        let (v, h) = sample(201, -1.0, 1.0, f64::exp);
        let d = derivative_samples(&v, h).unwrap();
        for (i, di) in d.iter().enumerate() {
            let x = -1.0 + i as f64 * h;
            assert!((di - x.exp()).abs() < 1e-7, "at {x}: {di}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_degree_seven() {
        let (x, w) = gauss_legendre_4();
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(7)).sum();
        assert!((s - 0.125).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn cubics_are_exact(
            c in prop::array::uniform4(-5.0f64..5.0),
            n in 3usize..60,
            a in -2.0f64..0.0,
            len in 0.1f64..3.0,
        ) {
            let f = |t: f64| c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t;
            let b = a + len;
            let (v, h) = sample(n, a, b, f);
            let anti = |t: f64| c[0] * t + c[1] * t * t / 2.0 + c[2] * t.powi(3) / 3.0 + c[3] * t.powi(4) / 4.0;
            let exact = anti(b) - anti(a);
            prop_assert!((integrate_samples(&v, h).unwrap() - exact).abs() <= 1e-12 * (1.0 + exact.abs()) * 10.0);
        }
    }
}
