use serde::{Deserialize, Serialize};

use super::SpectralError;
use crate::numerics::{
    derivative_samples, eigenpair, eigenvalue, integrate_samples, TridiagonalSystem,
};

pub const DEFAULT_DEPTH: f64 = 100.0;
pub const DEFAULT_STEP: f64 = 0.005;
pub const MAX_STEP: f64 = 0.1;

/// Exponent of e at which t^{-5/2} overflows a double.
const MAX_T_FORM_DEPTH: f64 = 280.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coordinate {
    /// t ∈ [e^{−Z}, 1] on the log-uniform grid, weight t⁴.
    T,
    /// z ∈ [−Z, 0] on the uniform grid.
    Z,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OuterBoundary {
    /// ½(K−1)g(1) + g′(1) = 0, equivalently ½(K−6)h(0) + h′(0) = 0.
    #[default]
    Robin,
    /// h(0) = 0.
    Dirichlet,
}

/// Truncated radial eigenproblem on z ∈ [−Z, 0] (t ∈ [e^{−Z}, 1]) with a
/// Dirichlet condition at the inner end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    k: f64,
    depth: f64,
    step: f64,
    coordinate: Coordinate,
    #[serde(default)]
    outer: OuterBoundary,
}

impl RadialProblem {
    pub fn new(
        k: f64,
        depth: f64,
        step: f64,
        coordinate: Coordinate,
    ) -> Result<Self, SpectralError> {
        Self::with_outer(k, depth, step, coordinate, OuterBoundary::Robin)
    }

    pub fn with_outer(
        k: f64,
        depth: f64,
        step: f64,
        coordinate: Coordinate,
        outer: OuterBoundary,
    ) -> Result<Self, SpectralError> {
        if !k.is_finite() {
            return Err(SpectralError::InvalidInput(format!(
                "K must be finite, got {k}"
            )));
        }
        if !(depth > 0.0 && depth.is_finite()) {
            return Err(SpectralError::InvalidInput(format!(
                "truncation depth must be positive, got {depth}"
            )));
        }
        if !(step > 0.0 && step.is_finite()) {
            return Err(SpectralError::InvalidInput(format!(
                "step must be positive, got {step}"
            )));
        }
        if step > MAX_STEP {
            return Err(SpectralError::GridTooCoarse {
                step,
                max: MAX_STEP,
            });
        }
        let ratio = depth / step;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio.max(1.0) || ratio.round() < 10.0 {
            return Err(SpectralError::InvalidInput(format!(
                "depth/step = {ratio} must be an integer ≥ 10"
            )));
        }
        Ok(Self {
            k,
            depth,
            step,
            coordinate,
            outer,
        })
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn depth(&self) -> f64 {
        self.depth
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn coordinate(&self) -> Coordinate {
        self.coordinate
    }

    pub fn outer(&self) -> OuterBoundary {
        self.outer
    }

    pub fn intervals(&self) -> usize {
        (self.depth / self.step).round() as usize
    }

    pub fn with_k(&self, k: f64) -> Result<Self, SpectralError> {
        Self::with_outer(k, self.depth, self.step, self.coordinate, self.outer)
    }

    pub fn with_coordinate(&self, coordinate: Coordinate) -> Self {
        Self {
            coordinate,
            ..*self
        }
    }

    pub fn with_depth(&self, depth: f64) -> Result<Self, SpectralError> {
        Self::with_outer(self.k, depth, self.step, self.coordinate, self.outer)
    }

    pub fn with_step(&self, step: f64) -> Result<Self, SpectralError> {
        Self::with_outer(self.k, self.depth, step, self.coordinate, self.outer)
    }

    /// Grid nodes, j = 0 at the inner Dirichlet end.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.intervals();
        (0..=n)
            .map(|j| {
                let z = -((n - j) as f64) * self.step;
                match self.coordinate {
                    Coordinate::Z => z,
                    Coordinate::T => z.exp(),
                }
            })
            .collect()
    }

    /// Symmetrized operator M^{-1/2} A M^{-1/2} on the unknown nodes
    /// j = 1..N (or 1..N−1 with a Dirichlet outer end), together with the
    /// scaled masses used to undo the symmetrization.
    fn system(&self) -> Result<(TridiagonalSystem, Vec<f64>), SpectralError> {
        let n = self.intervals();
        let unknowns = match self.outer {
            OuterBoundary::Robin => n,
            OuterBoundary::Dirichlet => n - 1,
        };
        let s = self.step;
        let robin = self.outer == OuterBoundary::Robin;
        let (diag, off, masses) = match self.coordinate {
            Coordinate::Z => {
                // energy Σ (h_{j+1} − h_j)²/s + ½(K−6)h_N² over the trapezoid
                // masses s (interior) and s/2 (outer node)
                let mut diag = vec![2.0 / (s * s) + 6.25; unknowns];
                let mut off = vec![-1.0 / (s * s); unknowns - 1];
                let mut masses = vec![s; unknowns];
                if robin {
                    diag[n - 1] = 2.0 / (s * s) + (self.k - 6.0) / s + 6.25;
                    off[n - 2] = -(2f64.sqrt()) / (s * s);
                    masses[n - 1] = 0.5 * s;
                }
                (diag, off, masses)
            }
            Coordinate::T => {
                // fluxes 5/(t_j^{-5} − t_{j+1}^{-5}) and masses t_j⁴(t_{j+1} − t_{j−1})/2,
                // both divided by t_j⁵; on the log grid the ratios are constant
                let decay = -(-5.0 * s).exp_m1(); // 1 − r^{-5}
                let flux_hat = 5.0 / decay;
                let flux_low = 5.0 * (-5.0 * s).exp() / decay;
                let m_interior = s.sinh();
                let m_outer = -0.5 * (-s).exp_m1();
                let mut diag = vec![(flux_hat + flux_low) / m_interior; unknowns];
                let mut m_hat = vec![m_interior; unknowns];
                if robin {
                    m_hat[n - 1] = m_outer;
                    diag[n - 1] = (flux_low + 0.5 * (self.k - 1.0)) / m_outer;
                }
                let r_half = (-2.5 * s).exp();
                let off = (0..unknowns - 1)
                    .map(|i| -flux_hat * r_half / (m_hat[i] * m_hat[i + 1]).sqrt())
                    .collect();
                (diag, off, m_hat)
            }
        };
        Ok((TridiagonalSystem::new(diag, off)?, masses))
    }
}

impl Default for RadialProblem {
    fn default() -> Self {
        Self {
            k: 8.0,
            depth: DEFAULT_DEPTH,
            step: DEFAULT_STEP,
            coordinate: Coordinate::Z,
            outer: OuterBoundary::Robin,
        }
    }
}

/// Principal eigenpair of a [`RadialProblem`]. The eigenfunction (h in the
/// z-form, g in the t-form) is sampled at every node, zero at Dirichlet ends,
/// and has unit norm in the discrete weighted L² inner product. `residual` is
/// ‖Bv − λv‖ relative to ‖B‖∞ for the symmetrized matrix B.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub eigenvalue: f64,
    pub eigenfunction: Vec<f64>,
    pub nodes: Vec<f64>,
    pub residual: f64,
    pub coordinate: Coordinate,
    pub depth: f64,
    pub step: f64,
}

/// Principal eigenvalue only; cheaper than the full eigenpair.
pub fn radial_eigenvalue(problem: &RadialProblem) -> Result<f64, SpectralError> {
    let (system, _) = problem.system()?;
    Ok(eigenvalue(&system, 0)?)
}

pub fn radial_eigensolve(problem: &RadialProblem) -> Result<EigenResult, SpectralError> {
    if problem.coordinate == Coordinate::T && problem.depth > MAX_T_FORM_DEPTH {
        return Err(SpectralError::InvalidInput(format!(
            "t-form eigenfunction overflows for depth {} > {MAX_T_FORM_DEPTH}",
            problem.depth
        )));
    }
    let (system, masses) = problem.system()?;
    let pair = eigenpair(&system, 0)?;
    let residual = pair.residual / system.norm_inf();
    let nodes = problem.nodes();
    let mut f = vec![0.0; nodes.len()];
    for (i, v) in pair.vector.iter().enumerate() {
        let j = i + 1;
        f[j] = match problem.coordinate {
            Coordinate::Z => v / masses[i].sqrt(),
            Coordinate::T => v * nodes[j].powf(-2.5) / masses[i].sqrt(),
        };
    }
    Ok(EigenResult {
        eigenvalue: pair.value,
        eigenfunction: f,
        nodes,
        residual,
        coordinate: problem.coordinate,
        depth: problem.depth,
        step: problem.step,
    })
}

pub fn radial_eigensolve_z(problem: &RadialProblem) -> Result<EigenResult, SpectralError> {
    if problem.coordinate != Coordinate::Z {
        return Err(SpectralError::InvalidInput(
            "expected a z-form problem".into(),
        ));
    }
    radial_eigensolve(problem)
}

pub fn radial_eigensolve_t(problem: &RadialProblem) -> Result<EigenResult, SpectralError> {
    if problem.coordinate != Coordinate::T {
        return Err(SpectralError::InvalidInput(
            "expected a t-form problem".into(),
        ));
    }
    radial_eigensolve(problem)
}

/// h(z) = t^{5/2} g(t) at z = log t. Returns (z, h).
pub fn change_of_variables(t: &[f64], g: &[f64]) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    if t.len() != g.len() {
        return Err(SpectralError::InvalidInput("t and g lengths differ".into()));
    }
    if let Some(bad) = t.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(SpectralError::InvalidInput(format!(
            "t-grid point {bad} outside (0, 1]"
        )));
    }
    let z = t.iter().map(|t| t.ln()).collect();
    let h = t.iter().zip(g).map(|(t, g)| t.powf(2.5) * g).collect();
    Ok((z, h))
}

/// g(t) = t^{−5/2} h(z) at t = e^z. Returns (t, g).
pub fn inverse_change_of_variables(
    z: &[f64],
    h: &[f64],
) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    if z.len() != h.len() {
        return Err(SpectralError::InvalidInput("z and h lengths differ".into()));
    }
    if let Some(bad) = z.iter().find(|&&z| !(z <= 0.0 && z.is_finite())) {
        return Err(SpectralError::InvalidInput(format!(
            "z-grid point {bad} outside (−∞, 0]"
        )));
    }
    let t: Vec<f64> = z.iter().map(|z| z.exp()).collect();
    let g = t.iter().zip(h).map(|(t, h)| h / t.powf(2.5)).collect();
    Ok((t, g))
}

fn check_decay(h: &[f64]) -> Result<(), SpectralError> {
    if h.len() < 5 {
        return Err(SpectralError::InvalidInput(format!(
            "need at least 5 samples, got {}",
            h.len()
        )));
    }
    let max = h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if !(max > 0.0 && max.is_finite()) {
        return Err(SpectralError::Precondition(
            "samples must be finite and not all zero".into(),
        ));
    }
    if h[0].abs() > 1e-8 * max {
        return Err(SpectralError::Precondition(format!(
            "h does not decay at the truncated end: |h(−Z)| = {:e}, max |h| = {max:e}",
            h[0].abs()
        )));
    }
    Ok(())
}

/// ∫(h′² + 25/4 h²) dz + ½(K−6)h(0)² for uniform samples on [−Z, 0]
/// (first sample at −Z, last at 0).
pub fn radial_energy(h: &[f64], step: f64, k: f64) -> Result<f64, SpectralError> {
    check_decay(h)?;
    let dh = derivative_samples(h, step)?;
    let density: Vec<f64> = h
        .iter()
        .zip(&dh)
        .map(|(h, d)| d * d + 6.25 * h * h)
        .collect();
    let last = h[h.len() - 1];
    Ok(integrate_samples(&density, step)? + 0.5 * (k - 6.0) * last * last)
}

/// Rayleigh quotient of [`radial_energy`] against ∫ h² dz.
pub fn radial_rayleigh_quotient(h: &[f64], step: f64, k: f64) -> Result<f64, SpectralError> {
    let energy = radial_energy(h, step, k)?;
    let squares: Vec<f64> = h.iter().map(|x| x * x).collect();
    Ok(energy / integrate_samples(&squares, step)?)
}

/// Richardson-extrapolated principal eigenpair from steps s and s/2, with
/// the eigenfunction expressed as h on the coarse z-grid and normalized in
/// the trapezoid L²(dz) norm.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtrapolatedEigenpair {
    pub eigenvalue: f64,
    pub z: Vec<f64>,
    pub h: Vec<f64>,
    pub coarse: f64,
    pub fine: f64,
}

fn profile(result: &EigenResult) -> Result<(Vec<f64>, Vec<f64>), SpectralError> {
    match result.coordinate {
        Coordinate::Z => Ok((result.nodes.clone(), result.eigenfunction.clone())),
        Coordinate::T => change_of_variables(&result.nodes, &result.eigenfunction),
    }
}

fn normalize_trapezoid(h: &mut [f64], step: f64) {
    let n = h.len();
    let sum: f64 = h
        .iter()
        .enumerate()
        .map(|(i, x)| {
            if i == 0 || i == n - 1 {
                0.5 * x * x
            } else {
                x * x
            }
        })
        .sum();
    let norm = (sum * step).sqrt();
    let pivot = h
        .iter()
        .copied()
        .fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    let scale = if pivot < 0.0 { -1.0 / norm } else { 1.0 / norm };
    h.iter_mut().for_each(|x| *x *= scale);
}

pub fn richardson_eigenpair(
    problem: &RadialProblem,
) -> Result<ExtrapolatedEigenpair, SpectralError> {
    let fine_problem = problem.with_step(problem.step / 2.0)?;
    let coarse = radial_eigensolve(problem)?;
    let fine = radial_eigensolve(&fine_problem)?;
    let (z, mut hc) = profile(&coarse)?;
    let (_, hf_all) = profile(&fine)?;
    let mut hf: Vec<f64> = hf_all.iter().step_by(2).copied().collect();
    normalize_trapezoid(&mut hc, problem.step);
    normalize_trapezoid(&mut hf, problem.step);
    let mut h: Vec<f64> = hc
        .iter()
        .zip(&hf)
        .map(|(c, f)| (4.0 * f - c) / 3.0)
        .collect();
    normalize_trapezoid(&mut h, problem.step);
    Ok(ExtrapolatedEigenpair {
        eigenvalue: (4.0 * fine.eigenvalue - coarse.eigenvalue) / 3.0,
        z,
        h,
        coarse: coarse.eigenvalue,
        fine: fine.eigenvalue,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::delta1_closed;
    use proptest::prelude::*;

    fn z_problem(k: f64, depth: f64, step: f64) -> RadialProblem {
        RadialProblem::new(k, depth, step, Coordinate::Z).unwrap()
    }

    #[test]
    fn validation() {
        assert!(matches!(
            RadialProblem::new(1.0, 100.0, 0.2, Coordinate::Z),
            Err(SpectralError::GridTooCoarse { .. })
        ));
        assert!(RadialProblem::new(1.0, 100.0, 0.03, Coordinate::Z).is_err());
        assert!(RadialProblem::new(1.0, 0.5, 0.1, Coordinate::Z).is_err());
        assert!(RadialProblem::new(f64::NAN, 10.0, 0.1, Coordinate::Z).is_err());
        assert!(RadialProblem::new(1.0, 1.0, 0.1, Coordinate::Z).is_ok());
    }

    #[test]
    fn neumann_equivalent_case() {
        let r = radial_eigensolve_z(&z_problem(1.0, 80.0, 0.005)).unwrap();
        assert!(r.eigenvalue.abs() <= 1e-3, "{}", r.eigenvalue);
        assert!(r.residual <= 1e-8);
        let t = radial_eigensolve_t(&z_problem(1.0, 80.0, 0.005).with_coordinate(Coordinate::T))
            .unwrap();
        assert!(t.eigenvalue.abs() <= 1e-3, "{}", t.eigenvalue);
    }

    #[test]
    fn subcritical_value() {
        let r = radial_eigenvalue(&z_problem(5.5, 100.0, 0.005)).unwrap();
        assert!((r - 6.1875).abs() <= 1e-3);
    }

    #[test]
    fn critical_truncation_gap() {
        let z = 200.0;
        let r = radial_eigenvalue(&z_problem(6.0, z, 0.01)).unwrap();
        let gap = (std::f64::consts::PI / (2.0 * z)).powi(2);
        assert!(r >= 6.25);
        assert!((r - 6.25 - gap).abs() < 0.1 * gap, "{r} vs gap {gap}");
        assert!((r - 6.25).abs() <= 1e-2);
    }

    #[test]
    fn eigenfunction_is_the_exponential_profile() {
        // K = 4: h = e^{z}, normalized in L²(dz) over (−∞, 0]: √2·e^{z}
        let r = radial_eigensolve_z(&z_problem(4.0, 40.0, 0.005)).unwrap();
        let err = r
            .nodes
            .iter()
            .zip(&r.eigenfunction)
            .map(|(z, h)| (h - 2f64.sqrt() * z.exp()).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-4, "{err}");
    }

    #[test]
    fn second_order_convergence() {
        let exact = delta1_closed(4.0);
        let e1 = radial_eigenvalue(&z_problem(4.0, 40.0, 0.02)).unwrap() - exact;
        let e2 = radial_eigenvalue(&z_problem(4.0, 40.0, 0.01)).unwrap() - exact;
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
        let t1 = radial_eigenvalue(&z_problem(4.0, 40.0, 0.02).with_coordinate(Coordinate::T))
            .unwrap()
            - exact;
        let t2 = radial_eigenvalue(&z_problem(4.0, 40.0, 0.01).with_coordinate(Coordinate::T))
            .unwrap()
            - exact;
        assert!((t1 / t2 - 4.0).abs() < 0.1, "{}", t1 / t2);
    }

    #[test]
    fn change_of_variables_round_trip() {
        let t: Vec<f64> = (0..50).map(|j| (-(j as f64) * 0.3).exp()).collect();
        let g: Vec<f64> = t.iter().map(|t| t.powf(-2.5)).collect();
        let (z, h) = change_of_variables(&t, &g).unwrap();
        assert!(h.iter().all(|h| (h - 1.0).abs() < 1e-12));
        let (t2, g2) = inverse_change_of_variables(&z, &h).unwrap();
        for (a, b) in t.iter().zip(&t2) {
            assert!((a - b).abs() <= 1e-15 * a.max(1e-300) * 4.0);
        }
        for (a, b) in g.iter().zip(&g2) {
            assert!((a - b).abs() <= 1e-12 * a.abs());
        }
        assert!(change_of_variables(&[0.0, 1.0], &[1.0, 1.0]).is_err());
        // subcritical eigenfunction t^{(1−K)/2} maps to e^{(6−K)z/2}
        let k = 3.0;
        let g: Vec<f64> = t.iter().map(|t| t.powf((1.0 - k) / 2.0)).collect();
        let (z, h) = change_of_variables(&t, &g).unwrap();
        for (z, h) in z.iter().zip(&h) {
            assert!((h - ((6.0 - k) * z / 2.0).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn energy_of_the_analytic_minimizer() {
        let (depth, step) = (40.0, 1e-3);
        let n = (depth / step) as usize;
        let h: Vec<f64> = (0..=n).map(|j| (-depth + j as f64 * step).exp()).collect();
        let q = radial_rayleigh_quotient(&h, step, 4.0).unwrap();
        assert!((q - 5.25).abs() < 1e-6, "{q}");
    }

    #[test]
    fn boundary_term_vanishes_with_zero_trace() {
        let (depth, step) = (40.0, 1e-3);
        let n = (depth / step) as usize;
        let h: Vec<f64> = (0..=n)
            .map(|j| {
                let z = -depth + j as f64 * step;
                -z * z.exp()
            })
            .collect();
        assert_eq!(h[n], 0.0);
        let a = radial_energy(&h, step, 8.0).unwrap();
        let b = radial_energy(&h, step, -50.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn slowly_decaying_sequence() {
        // exact quotient of h = εe^{εz} on (−∞, 0] with K = 8 is 25/4 + 2ε + ε²
        for &(eps, step) in &[(1e-3f64, 0.5f64), (1e-4, 5.0)] {
            let depth = (18.5 / eps / step).ceil() * step;
            let n = (depth / step) as usize;
            let h: Vec<f64> = (0..=n)
                .map(|j| eps * (eps * (-depth + j as f64 * step)).exp())
                .collect();
            let q = radial_rayleigh_quotient(&h, step, 8.0).unwrap();
            let exact = 6.25 + 2.0 * eps + eps * eps;
            assert!((q - exact).abs() < 1e-8, "{q} vs {exact}");
        }
    }

    #[test]
    fn non_decaying_input_is_refused() {
        let h = vec![1.0; 20];
        assert!(matches!(
            radial_energy(&h, 0.1, 8.0),
            Err(SpectralError::Precondition(_))
        ));
    }

    #[test]
    fn dirichlet_outer_end_saturates() {
        let p =
            RadialProblem::with_outer(8.0, 200.0, 0.01, Coordinate::Z, OuterBoundary::Dirichlet)
                .unwrap();
        let r = radial_eigenvalue(&p).unwrap();
        let gap = (std::f64::consts::PI / 200.0).powi(2);
        assert!(r >= 6.25 && (r - 6.25 - gap).abs() < 1e-5, "{r}");
    }

    #[test]
    fn extrapolated_forms_agree() {
        for &k in &[1.0, 4.0, 8.0] {
            let z = richardson_eigenpair(&z_problem(k, 100.0, 0.01)).unwrap();
            let t = richardson_eigenpair(&z_problem(k, 100.0, 0.01).with_coordinate(Coordinate::T))
                .unwrap();
            assert!(
                (z.eigenvalue - t.eigenvalue).abs() <= 1e-6,
                "K={k}: {} vs {}",
                z.eigenvalue,
                t.eigenvalue
            );
            let sup =
                z.h.iter()
                    .zip(&t.h)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
            assert!(sup <= 1e-6, "K={k}: sup {sup}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn z_form_never_drops_below_the_essential_spectrum(k in 6.0f64..40.0, depth_steps in 20usize..200) {
            let p = z_problem(k, depth_steps as f64 * 0.05, 0.05);
            prop_assert!(radial_eigenvalue(&p).unwrap() >= 6.25 - 1e-9);
        }

        #[test]
        fn saturated_value_decreases_with_depth(k in 6.0f64..30.0) {
            let a = radial_eigenvalue(&z_problem(k, 20.0, 0.05)).unwrap();
            let b = radial_eigenvalue(&z_problem(k, 40.0, 0.05)).unwrap();
            prop_assert!(b < a);
        }
    }
}
