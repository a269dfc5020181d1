use super::NumericsError;

/// Residual target for eigenpairs, relative to the infinity norm of the matrix.
pub const DEFAULT_EIGEN_RESIDUAL: f64 = 1e-10;

const MAX_BISECTION: usize = 300;
const MAX_INVERSE_ITERATION: usize = 30;

/// Symmetric tridiagonal matrix stored as its diagonal and first
/// off-diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    diagonal: Vec<f64>,
    off_diagonal: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn new(diagonal: Vec<f64>, off_diagonal: Vec<f64>) -> Result<Self, NumericsError> {
        if diagonal.is_empty() {
            return Err(NumericsError::InvalidInput("empty diagonal".into()));
        }
        if off_diagonal.len() + 1 != diagonal.len() {
            return Err(NumericsError::InvalidInput(format!(
                "off-diagonal has length {}, expected {}",
                off_diagonal.len(),
                diagonal.len() - 1
            )));
        }
        if diagonal.iter().chain(&off_diagonal).any(|x| !x.is_finite()) {
            return Err(NumericsError::InvalidInput(
                "non-finite matrix entry".into(),
            ));
        }
        Ok(Self {
            diagonal,
            off_diagonal,
        })
    }

    pub fn len(&self) -> usize {
        self.diagonal.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diagonal.is_empty()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off_diagonal
    }

    /// Returns `self + c·I`.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            diagonal: self.diagonal.iter().map(|d| d + c).collect(),
            off_diagonal: self.off_diagonal.clone(),
        }
    }

    pub fn norm_inf(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let left = if i > 0 {
                    self.off_diagonal[i - 1].abs()
                } else {
                    0.0
                };
                let right = self.off_diagonal.get(i).map_or(0.0, |e| e.abs());
                self.diagonal[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diagonal[i] * x[i];
                if i > 0 {
                    y += self.off_diagonal[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.off_diagonal[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.len() {
            let left = if i > 0 {
                self.off_diagonal[i - 1].abs()
            } else {
                0.0
            };
            let right = self.off_diagonal.get(i).map_or(0.0, |e| e.abs());
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        (lo, hi)
    }

    fn pivmin(&self) -> f64 {
        let e2 = self
            .off_diagonal
            .iter()
            .map(|e| e * e)
            .fold(1.0f64, f64::max);
        f64::MIN_POSITIVE * e2
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence count).
    pub fn sturm_count(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diagonal[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.len() {
            let e = self.off_diagonal[i - 1];
            q = self.diagonal[i] - x - e * e / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// Eigenvalue with its unit eigenvector and the residual `‖Av − λv‖₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

/// `index`-th smallest eigenvalue (0-based) by bisection on Sturm counts.
pub fn eigenvalue(system: &TridiagonalSystem, index: usize) -> Result<f64, NumericsError> {
    let n = system.len();
    if index >= n {
        return Err(NumericsError::InvalidInput(format!(
            "eigenvalue index {index} out of range for dimension {n}"
        )));
    }
    let (mut lo, mut hi) = system.gershgorin();
    let pad = f64::EPSILON * (lo.abs().max(hi.abs()) + 1.0) * n as f64;
    lo -= pad;
    hi += pad;
    for _ in 0..MAX_BISECTION {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if system.sturm_count(mid) > index {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// The `count` smallest eigenvalues in ascending order.
pub fn lowest_eigenvalues(
    system: &TridiagonalSystem,
    count: usize,
) -> Result<Vec<f64>, NumericsError> {
    (0..count).map(|k| eigenvalue(system, k)).collect()
}

pub fn smallest_eigenpair(system: &TridiagonalSystem) -> Result<Eigenpair, NumericsError> {
    eigenpair(system, 0)
}

/// Eigenpair for the `index`-th smallest eigenvalue: bisection for the value,
/// inverse iteration for the vector. The vector is normalized to unit length
/// with its largest-magnitude entry positive.
pub fn eigenpair(system: &TridiagonalSystem, index: usize) -> Result<Eigenpair, NumericsError> {
    let n = system.len();
    if n == 1 && index == 0 {
        return Ok(Eigenpair {
            value: system.diagonal[0],
            vector: vec![1.0],
            residual: 0.0,
        });
    }
    let value = eigenvalue(system, index)?;
    let norm = system.norm_inf().max(f64::MIN_POSITIVE);

    let factor = TridiagonalLu::factor(system, value);
    // deterministic, non-symmetric start vector
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64 + 1.0) * 0.618_033_988_75).fract())
        .collect();
    normalize(&mut v);
    let mut residual = f64::INFINITY;
    for _ in 0..MAX_INVERSE_ITERATION {
        let mut w = factor.solve(&v);
        if w.iter().any(|x| !x.is_finite()) {
            // exact singularity: perturb the start vector and retry
            w = v
                .iter()
                .enumerate()
                .map(|(i, x)| x + 1e-3 * (i % 7) as f64)
                .collect();
        }
        normalize(&mut w);
        v = w;
        residual = residual_norm(system, value, &v);
        if residual <= DEFAULT_EIGEN_RESIDUAL * norm {
            orient(&mut v);
            return Ok(Eigenpair {
                value,
                vector: v,
                residual,
            });
        }
    }
    Err(NumericsError::Convergence {
        what: "inverse iteration",
        iterations: MAX_INVERSE_ITERATION,
        residual,
    })
}

fn residual_norm(system: &TridiagonalSystem, value: f64, v: &[f64]) -> f64 {
    system
        .apply(v)
        .iter()
        .zip(v)
        .map(|(av, x)| (av - value * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn normalize(v: &mut [f64]) {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
}

fn orient(v: &mut [f64]) {
    let pivot = v
        .iter()
        .copied()
        .fold(0.0f64, |acc, x| if x.abs() > acc.abs() { x } else { acc });
    if pivot < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// LU factorization of `T − σI` with partial pivoting (the tridiagonal
/// analogue of LAPACK's `gttrf`).
struct TridiagonalLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper1: Vec<f64>,
    upper2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor(system: &TridiagonalSystem, shift: f64) -> Self {
        let n = system.len();
        let tiny = f64::EPSILON * system.norm_inf().max(f64::MIN_POSITIVE);
        let mut diag: Vec<f64> = system.diagonal.iter().map(|d| d - shift).collect();
        let mut sub = system.off_diagonal.clone();
        let mut upper1 = system.off_diagonal.clone();
        let mut upper2 = vec![0.0; n.saturating_sub(2)];
        let mut lower = vec![0.0; n - 1];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if diag[i].abs() >= sub[i].abs() {
                if diag[i] == 0.0 {
                    diag[i] = tiny;
                }
                let l = sub[i] / diag[i];
                lower[i] = l;
                diag[i + 1] -= l * upper1[i];
            } else {
                let l = diag[i] / sub[i];
                diag[i] = sub[i];
                lower[i] = l;
                let tmp = upper1[i];
                upper1[i] = diag[i + 1];
                diag[i + 1] = tmp - l * diag[i + 1];
                if i + 1 < n - 1 {
                    upper2[i] = upper1[i + 1];
                    upper1[i + 1] *= -l;
                }
                swapped[i] = true;
            }
            sub[i] = 0.0;
        }
        if diag[n - 1] == 0.0 {
            diag[n - 1] = tiny;
        }
        Self {
            lower,
            diag,
            upper1,
            upper2,
            swapped,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.diag.len();
        let mut x = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            x[i + 1] -= self.lower[i] * x[i];
        }
        x[n - 1] /= self.diag[n - 1];
        if n > 1 {
            x[n - 2] = (x[n - 2] - self.upper1[n - 2] * x[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.upper1[i] * x[i + 1] - self.upper2[i] * x[i + 2]) / self.diag[i];
        }
        x
    }
}
