use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use simons_core::calibration::DEFAULT_FIELD_TOL;
use simons_core::geometry::DomainParams;
use simons_core::spectral::{
    Coordinate, OuterBoundary, RadialProblem, DEFAULT_DEPTH, DEFAULT_STEP, MAX_STEP,
};

/// Largest truncation depth for which the t-form eigenfunction is representable.
const MAX_T_DEPTH: f64 = 280.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Sweep,
    Calibrate,
    Compare,
    CompactAnalog,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Calibrate => "calibrate",
            Command::Compare => "compare",
            Command::CompactAnalog => "compact-analog",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    depth: Option<f64>,
    step: Option<f64>,
    coordinate: Option<Coordinate>,
    outer: Option<OuterBoundary>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    k: Option<f64>,
    upsilon: Option<f64>,
    solver: Option<RawSolver>,
    k_values: Option<Vec<f64>>,
    kappa_values: Option<Vec<f64>>,
    seeds: Option<Vec<u64>>,
    sign_samples: Option<usize>,
    field_tolerance: Option<f64>,
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverConfig {
    pub depth: f64,
    pub step: f64,
    pub coordinate: Coordinate,
    pub outer: OuterBoundary,
}

/// Validated run configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub k: f64,
    pub upsilon: f64,
    pub solver: SolverConfig,
    pub k_values: Vec<f64>,
    pub kappa_values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub sign_samples: usize,
    pub field_tolerance: f64,
    pub out_dir: PathBuf,
}

pub fn default_k_values() -> Vec<f64> {
    (1..=10).map(f64::from).collect()
}

pub fn default_kappa_values() -> Vec<f64> {
    vec![25.0, 50.0, 100.0, 200.0]
}

pub fn default_seeds() -> Vec<u64> {
    (1..=20).collect()
}

pub const DEFAULT_K: f64 = 8.0;
pub const DEFAULT_UPSILON: f64 = 0.1;
pub const DEFAULT_SIGN_SAMPLES: usize = 1000;

impl RunConfig {
    pub fn params(&self) -> DomainParams {
        DomainParams::new(self.k, self.upsilon).expect("validated domain parameters")
    }

    pub fn problem(&self) -> RadialProblem {
        RadialProblem::with_outer(
            self.k,
            self.solver.depth,
            self.solver.step,
            self.solver.coordinate,
            self.solver.outer,
        )
        .expect("validated solver template")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Parse(String),
    Invalid(Vec<String>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Parse(msg) => write!(f, "cannot parse config: {msg}"),
            ConfigError::Invalid(violations) => {
                write!(f, "invalid config:")?;
                for v in violations {
                    write!(f, "\n  - {v}")?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

/// Parses and checks a JSON run configuration for `command`. Every violation
/// is collected rather than stopping at the first.
pub fn validate_config(raw: &str, command: Command) -> Result<RunConfig, ConfigError> {
    let raw: RawConfig =
        serde_json::from_str(raw).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut violations = Vec::new();

    if let Some(c) = raw.command {
        if c != command {
            violations.push(format!(
                "config is for command '{c}' but '{command}' was requested"
            ));
        }
    }

    let k = raw.k.unwrap_or(DEFAULT_K);
    if !k.is_finite() {
        violations.push(format!("k must be finite, got {k}"));
    }
    if matches!(command, Command::Calibrate | Command::Compare) && k < 0.0 {
        violations.push(format!("k must be nonnegative for {command}, got {k}"));
    }
    let upsilon = raw.upsilon.unwrap_or(DEFAULT_UPSILON);
    if !(upsilon > 0.0) {
        violations.push(format!("upsilon must be positive, got {upsilon}"));
    } else if upsilon > 0.3 {
        violations.push(format!("upsilon must not exceed 0.3, got {upsilon}"));
    }

    let solver = raw.solver.unwrap_or_default();
    let solver = SolverConfig {
        depth: solver.depth.unwrap_or(DEFAULT_DEPTH),
        step: solver.step.unwrap_or(DEFAULT_STEP),
        coordinate: solver.coordinate.unwrap_or(Coordinate::Z),
        outer: solver.outer.unwrap_or_default(),
    };
    let mut grid_ok = true;
    if !(solver.depth > 0.0 && solver.depth.is_finite()) {
        violations.push(format!(
            "solver.depth must be positive, got {}",
            solver.depth
        ));
        grid_ok = false;
    }
    if !(solver.step > 0.0) {
        violations.push(format!("solver.step must be positive, got {}", solver.step));
        grid_ok = false;
    } else if solver.step > MAX_STEP {
        violations.push(format!(
            "solver.step {} exceeds the maximum {MAX_STEP}; the grid is too coarse",
            solver.step
        ));
        grid_ok = false;
    }
    if grid_ok {
        let ratio = solver.depth / solver.step;
        if (ratio - ratio.round()).abs() > 1e-9 * ratio || ratio.round() < 10.0 {
            violations.push(format!(
                "solver.depth / solver.step must be an integer of at least 10, got {ratio}"
            ));
        }
    }
    if solver.coordinate == Coordinate::T && solver.depth > MAX_T_DEPTH {
        violations.push(format!(
            "solver.depth must not exceed {MAX_T_DEPTH} with the t coordinate, got {}",
            solver.depth
        ));
    }

    let k_values = raw.k_values.unwrap_or_else(default_k_values);
    if k_values.is_empty() {
        violations.push("k_values must not be empty".into());
    }
    if k_values.iter().any(|k| !k.is_finite()) {
        violations.push("k_values must all be finite".into());
    }

    let kappa_values = raw.kappa_values.unwrap_or_else(default_kappa_values);
    if kappa_values.is_empty() {
        violations.push("kappa_values must not be empty".into());
    }
    if kappa_values.iter().any(|k| !(*k > 0.0)) {
        violations.push("kappa_values must all be positive".into());
    }

    let seeds = raw.seeds.unwrap_or_else(default_seeds);
    if seeds.is_empty() {
        violations.push("seeds must not be empty".into());
    }

    let sign_samples = raw.sign_samples.unwrap_or(DEFAULT_SIGN_SAMPLES);
    if sign_samples == 0 {
        violations.push("sign_samples must be at least 1".into());
    }

    let field_tolerance = raw.field_tolerance.unwrap_or(DEFAULT_FIELD_TOL);
    if !(field_tolerance > 0.0 && field_tolerance <= 1e-8) {
        violations.push(format!(
            "field_tolerance must lie in (0, 1e-8], got {field_tolerance}"
        ));
    }

    if !violations.is_empty() {
        return Err(ConfigError::Invalid(violations));
    }
    Ok(RunConfig {
        command,
        k,
        upsilon,
        solver,
        k_values,
        kappa_values,
        seeds,
        sign_samples,
        field_tolerance,
        out_dir: raw.out_dir.unwrap_or_else(|| PathBuf::from(".")),
    })
}
