use super::NumericsError;

pub const DEFAULT_ODE_TOL: f64 = 1e-10;

/// A point of an integration path: independent variable, state vector and the
/// step size that will be attempted next.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeState {
    pub t: f64,
    pub y: Vec<f64>,
    pub step: f64,
}

impl OdeState {
    pub fn new(t: f64, y: Vec<f64>, step: f64) -> Self {
        Self { t, y, step }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    /// Local error tolerance (mixed absolute/relative).
    pub tol: f64,
    pub max_steps: usize,
    pub max_step: f64,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_ODE_TOL,
            max_steps: 2_000_000,
            max_step: f64::INFINITY,
        }
    }
}

// Dormand–Prince 5(4) tableau
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand–Prince step of size `h` from `(t, y)`. Returns the fifth-order
/// solution and the embedded error estimate.
pub fn dopri_step<F>(field: &F, t: f64, y: &[f64], h: f64) -> (Vec<f64>, Vec<f64>)
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let n = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    let mut stage = vec![0.0; n];
    for i in 0..7 {
        for j in 0..n {
            let mut acc = y[j];
            for (l, kl) in k.iter().enumerate() {
                acc += h * A[i][l] * kl[j];
            }
            stage[j] = acc;
        }
        k.push(field(t + C[i] * h, &stage));
    }
    let mut y5 = vec![0.0; n];
    let mut err = vec![0.0; n];
    for j in 0..n {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for i in 0..7 {
            s5 += B5[i] * k[i][j];
            s4 += B4[i] * k[i][j];
        }
        y5[j] = y[j] + h * s5;
        err[j] = h * (s5 - s4);
    }
    (y5, err)
}

fn error_norm(y: &[f64], y_new: &[f64], err: &[f64], tol: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for ((a, b), e) in y.iter().zip(y_new).zip(err) {
        if !(b.is_finite() && e.is_finite()) {
            return f64::INFINITY;
        }
        let scale = tol * (1.0 + a.abs().max(b.abs()));
        worst = worst.max(e.abs() / scale);
    }
    worst
}

/// Adaptive integration with the default options and the given tolerance.
pub fn integrate_ode<F, S>(
    field: F,
    initial: OdeState,
    stop: S,
    tol: f64,
) -> Result<Vec<OdeState>, NumericsError>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    S: Fn(&OdeState) -> bool,
{
    integrate_ode_with(field, initial, stop, &OdeOptions::with_tol(tol))
}

/// Adaptive Dormand–Prince integration until `stop` holds. The stopping
/// event is located by bisection on the last step, so the final state is the
/// first point (to rounding) at which the predicate is true.
pub fn integrate_ode_with<F, S>(
    field: F,
    initial: OdeState,
    stop: S,
    options: &OdeOptions,
) -> Result<Vec<OdeState>, NumericsError>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    S: Fn(&OdeState) -> bool,
{
    if !(options.tol > 0.0) {
        return Err(NumericsError::InvalidInput(
            "ODE tolerance must be positive".into(),
        ));
    }
    if initial.y.iter().any(|v| !v.is_finite()) || !initial.t.is_finite() {
        return Err(NumericsError::InvalidInput(
            "non-finite initial state".into(),
        ));
    }
    if !(initial.step > 0.0) {
        return Err(NumericsError::InvalidInput(
            "initial step must be positive".into(),
        ));
    }

    let mut path = vec![initial.clone()];
    if stop(&initial) {
        return Ok(path);
    }
    let mut current = initial;
    let mut h = current.step.min(options.max_step);
    for _ in 0..options.max_steps {
        let min_step = 16.0 * f64::EPSILON * current.t.abs().max(1.0);
        if h < min_step {
            return Err(NumericsError::Singularity {
                last: Box::new(current),
            });
        }
        let (y_new, err) = dopri_step(&field, current.t, &current.y, h);
        let norm = error_norm(&current.y, &y_new, &err, options.tol);
        if norm > 1.0 {
            let factor = if norm.is_finite() {
                (0.9 * norm.powf(-0.2)).max(0.1)
            } else {
                0.1
            };
            h *= factor;
            continue;
        }
        let grow = if norm == 0.0 {
            5.0
        } else {
            (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0)
        };
        let next_h = (h * grow).min(options.max_step);
        let candidate = OdeState::new(current.t + h, y_new, next_h);
        if stop(&candidate) {
            let last = locate_event(&field, &current, h, &stop, next_h);
            path.push(last);
            return Ok(path);
        }
        path.push(candidate.clone());
        current = candidate;
        h = next_h;
    }
    Err(NumericsError::Convergence {
        what: "ODE integration",
        iterations: options.max_steps,
        residual: f64::NAN,
    })
}

fn locate_event<F, S>(field: &F, from: &OdeState, h: f64, stop: &S, next_h: f64) -> OdeState
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    S: Fn(&OdeState) -> bool,
{
    let (mut lo, mut hi) = (0.0, h);
    let mut best = OdeState::new(from.t + h, dopri_step(field, from.t, &from.y, h).0, next_h);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let state = OdeState::new(
            from.t + mid,
            dopri_step(field, from.t, &from.y, mid).0,
            next_h,
        );
        if stop(&state) {
            hi = mid;
            best = state;
        } else {
            lo = mid;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn circle(_t: f64, y: &[f64]) -> Vec<f64> {
        vec![-y[1], y[0]]
    }

    fn quarter_turn_error(tol: f64) -> f64 {
        let path = integrate_ode(
            circle,
            OdeState::new(0.0, vec![1.0, 0.0], 1e-3),
            |s| s.y[0] <= 0.0,
            tol,
        )
        .unwrap();
        let end = path.last().unwrap();
        ((end.y[0] - 0.0).powi(2) + (end.y[1] - 1.0).powi(2)).sqrt()
    }

    #[test]
    fn zero_field_keeps_state() {
        let path = integrate_ode(
            |_, y| vec![0.0; y.len()],
            OdeState::new(0.0, vec![3.0, -2.0], 0.1),
            |s| s.t >= 1.0,
            1e-10,
        )
        .unwrap();
        assert!(path.iter().all(|s| s.y == vec![3.0, -2.0]));
        assert!(path.last().unwrap().t >= 1.0);
    }

    #[test]
    fn quarter_turn_on_circle() {
        let path = integrate_ode(
            circle,
            OdeState::new(0.0, vec![1.0, 0.0], 1e-3),
            |s| s.y[0] <= 0.0,
            1e-10,
        )
        .unwrap();
        let end = path.last().unwrap();
        assert!(end.y[0] <= 0.0);
        assert!(end.y[0].abs() < 1e-9, "{:?}", end.y);
        assert!((end.y[1] - 1.0).abs() < 1e-9);
        assert!((end.t - FRAC_PI_2).abs() < 1e-9);
    }

    #[test]
    fn endpoint_error_tracks_tolerance() {
        // global error of a locally controlled fifth-order pair scales
        // roughly linearly with the tolerance
        let tols = [1e-6, 5e-7, 2.5e-7, 1.25e-7, 6.25e-8];
        let errs: Vec<f64> = tols.iter().map(|&t| quarter_turn_error(t)).collect();
        let n = tols.len() as f64;
        let xs: Vec<f64> = tols.iter().map(|t| t.ln()).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let slope = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(
            (0.6..=1.4).contains(&slope),
            "slope {slope}, errors {errs:?}"
        );
        assert!(errs.last().unwrap() < errs.first().unwrap());
    }

    #[test]
    fn blow_up_terminates_through_stop_predicate() {
        // y' = y², y(0) = 1 blows up at t = 1
        let path = integrate_ode(
            |_, y| vec![y[0] * y[0]],
            OdeState::new(0.0, vec![1.0], 1e-3),
            |s| s.y[0] >= 1e6,
            1e-10,
        )
        .unwrap();
        let end = path.last().unwrap();
        assert!(end.y[0] >= 1e6);
        assert!((end.t - (1.0 - 1e-6)).abs() < 1e-9);
    }

    #[test]
    fn genuine_singularity_reports_last_state() {
        // y' = -1/(1 - t)² … with a stop that never fires
        let err = integrate_ode(
            |t, _| vec![1.0 / (1.0 - t).abs().powf(1.5)],
            OdeState::new(0.0, vec![0.0], 1e-3),
            |_| false,
            1e-10,
        )
        .unwrap_err();
        match err {
            NumericsError::Singularity { last } => assert!(last.t < 1.0 && last.t > 0.99),
            other => panic!("unexpected {other:?}"),
        }
    }
}
