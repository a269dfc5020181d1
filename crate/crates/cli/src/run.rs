use std::f64::consts::PI;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use simons_core::calibration::{
    divergence_residual, gauss_green_check, integrate_base_leaf, interior_samples,
    minimality_check, sign_band_check, summarize_leaf, CalibrationField, MinimalityReport,
};
use simons_core::geometry::{make_competitor, Perturbation, Side};
use simons_core::spectral::{
    compact_analog_eigenvalue, delta1_closed, fit_first_order_coefficient, mu1_closed,
    radial_eigensolve, stability_sweep, Coordinate, OuterBoundary, ESSENTIAL_SPECTRUM_BOTTOM,
};

use crate::config::{Command, RunConfig};
use crate::output::{flag, opt_flag, opt_real, real, Table};

const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
const SUBCRITICAL_TOL: f64 = 1e-3;
const SATURATION_TOL: f64 = 1e-2;
const SATURATION_FLOOR: f64 = 1e-4;
const DIVERGENCE_TOL: f64 = 1e-3;
const DIVERGENCE_STEP: f64 = 1e-3;
const GAUSS_GREEN_TOL: f64 = 1e-4;
const CONE_SLACK_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub stages: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub config: RunConfig,
    pub results: Value,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
    pub timings: Timings,
}

struct Run {
    checks: Vec<CheckOutcome>,
    stages: Vec<(String, f64)>,
    verbose: bool,
    clock: Instant,
}

impl Run {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        if self.verbose {
            eprintln!("[{}] {name}: {detail}", if pass { "pass" } else { "FAIL" });
        }
        self.checks.push(CheckOutcome {
            name: name.into(),
            pass,
            detail,
        });
    }

    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        if self.verbose {
            eprintln!("{name}...");
        }
        let start = Instant::now();
        let out = f().with_context(|| format!("{name} failed"))?;
        self.stages
            .push((name.into(), start.elapsed().as_secs_f64()));
        Ok(out)
    }
}

/// Runs the configured command. Errors are computations that could not be
/// completed; failed checks are recorded in the report instead.
pub fn run(config: &RunConfig, verbose: bool) -> Result<(Report, Vec<Table>)> {
    let mut ctx = Run {
        checks: Vec::new(),
        stages: Vec::new(),
        verbose,
        clock: Instant::now(),
    };
    let (results, tables) = match config.command {
        Command::Spectrum => spectrum(config, &mut ctx)?,
        Command::Sweep => sweep(config, &mut ctx)?,
        Command::Calibrate => calibrate(config, &mut ctx)?,
        Command::Compare => compare(config, &mut ctx)?,
        Command::CompactAnalog => compact_analog(config, &mut ctx)?,
    };
    let pass = ctx.checks.iter().all(|c| c.pass);
    let report = Report {
        command: config.command.to_string(),
        config: config.clone(),
        results,
        checks: ctx.checks,
        pass,
        timings: Timings {
            total_seconds: ctx.clock.elapsed().as_secs_f64(),
            stages: ctx.stages,
        },
    };
    Ok((report, tables))
}

fn spectrum(config: &RunConfig, ctx: &mut Run) -> Result<(Value, Vec<Table>)> {
    let problem = config.problem();
    let result = ctx.stage("eigensolve", || Ok(radial_eigensolve(&problem)?))?;
    let k = config.k;
    let closed = delta1_closed(k);
    let discrepancy = (result.eigenvalue - closed).abs();

    ctx.check(
        "eigen_residual",
        result.residual <= EIGEN_RESIDUAL_TOL,
        format!(
            "relative residual {:.3e}, tol {EIGEN_RESIDUAL_TOL:e}",
            result.residual
        ),
    );
    let (pass, detail) = if config.solver.outer == OuterBoundary::Dirichlet || k >= 6.0 {
        let gap = result.eigenvalue - ESSENTIAL_SPECTRUM_BOTTOM;
        (
            gap.abs() <= SATURATION_TOL
                && (config.solver.coordinate == Coordinate::T || gap >= -SATURATION_FLOOR),
            format!("delta1 - 6.25 = {gap:.3e}, tol {SATURATION_TOL:e}"),
        )
    } else {
        (
            discrepancy <= SUBCRITICAL_TOL,
            format!("|fd - closed| = {discrepancy:.3e}, tol {SUBCRITICAL_TOL:e}"),
        )
    };
    ctx.check("closed_form", pass, detail);

    let mut table = Table::new("spectrum.csv", &["node", "eigenfunction"]);
    for (x, g) in result.nodes.iter().zip(&result.eigenfunction) {
        table.push(vec![real(*x), real(*g)]);
    }
    let results = json!({
        "k": k,
        "delta1_fd": result.eigenvalue,
        "delta1_closed": closed,
        "mu1_fd": result.eigenvalue - 6.0,
        "mu1_closed": mu1_closed(k),
        "discrepancy": discrepancy,
        "residual": result.residual,
        "nodes": result.nodes.len(),
    });
    Ok((results, vec![table]))
}

fn sweep(config: &RunConfig, ctx: &mut Run) -> Result<(Value, Vec<Table>)> {
    let template = config.problem();
    let report = ctx.stage("stability sweep", || {
        Ok(stability_sweep(&config.k_values, &template)?)
    })?;

    let errors: Vec<String> = report
        .rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("K={}: {e}", r.k)))
        .collect();
    ctx.check(
        "rows_solved",
        errors.is_empty(),
        if errors.is_empty() {
            format!("{} rows", report.rows.len())
        } else {
            errors.join("; ")
        },
    );
    let disagree: Vec<f64> = report
        .rows
        .iter()
        .filter(|r| r.stable.is_some_and(|s| s != r.stable_closed))
        .map(|r| r.k)
        .collect();
    ctx.check(
        "stability_classification",
        disagree.is_empty(),
        if disagree.is_empty() {
            "finite-difference and closed-form verdicts agree".into()
        } else {
            format!("finite-difference and closed-form verdicts differ at K = {disagree:?}")
        },
    );

    let mut table = Table::new(
        "sweep.csv",
        &["K", "delta1_closed", "delta1_fd", "mu1", "stable"],
    );
    for r in &report.rows {
        table.push(vec![
            real(r.k),
            real(r.delta1_closed),
            opt_real(r.delta1_fd),
            opt_real(r.mu1_fd),
            opt_flag(r.stable),
        ]);
    }
    Ok((serde_json::to_value(&report)?, vec![table]))
}

fn build_field(config: &RunConfig, ctx: &mut Run) -> Result<CalibrationField> {
    ctx.stage("calibration field", || {
        Ok(CalibrationField::new(config.field_tolerance)?)
    })
}

fn calibrate(config: &RunConfig, ctx: &mut Run) -> Result<(Value, Vec<Table>)> {
    let params = config.params();
    let field = build_field(config, ctx)?;

    let leaves = ctx.stage("base leaves", || {
        let mut out = Vec::new();
        for side in [Side::AboveDiagonal, Side::BelowDiagonal] {
            out.push(summarize_leaf(&integrate_base_leaf(
                side,
                config.field_tolerance.max(1e-12),
            )?));
        }
        Ok(out)
    })?;
    let leaves_ok = leaves
        .iter()
        .all(|s| (s.end_radius - 2.0).abs() < 1e-9 && s.monotone_approach && s.end_distance > 0.0);
    ctx.check(
        "base_leaf",
        leaves_ok,
        format!(
            "end radius {:.12}, distance to the diagonal {:.3e} -> {:.3e}",
            leaves[0].end_radius, leaves[0].distance_at_unit_radius, leaves[0].end_distance
        ),
    );

    let (coarse, fine) = ctx.stage("divergence residual", || {
        let pts = interior_samples(8, 8);
        let max_at = |h: f64| -> Result<f64> {
            let res: Result<Vec<f64>, _> = pts
                .par_iter()
                .map(|p| divergence_residual(*p, &field, h))
                .collect();
            Ok(res?.into_iter().fold(0.0, f64::max))
        };
        Ok((max_at(DIVERGENCE_STEP)?, max_at(DIVERGENCE_STEP / 2.0)?))
    })?;
    let ratio = coarse / fine;
    ctx.check(
        "divergence",
        coarse <= DIVERGENCE_TOL && (ratio - 4.0).abs() <= 0.5,
        format!("max residual {coarse:.3e} at h={DIVERGENCE_STEP:e}, refinement ratio {ratio:.3}"),
    );

    let gg = ctx.stage("gauss-green", || Ok(gauss_green_check(&params, &field)?))?;
    ctx.check(
        "gauss_green",
        gg.discrepancy <= GAUSS_GREEN_TOL,
        format!(
            "relative discrepancy {:.3e}, tol {GAUSS_GREEN_TOL:e}",
            gg.discrepancy
        ),
    );

    let band = ctx.stage("sign band", || {
        Ok(sign_band_check(&params, &field, config.sign_samples)?)
    })?;
    ctx.check(
        "sign_band",
        band.pass,
        match &band.first_violation {
            Some(v) => format!(
                "violation at d = {:.6} ({:?}): X.n = {:.3e}",
                v.distance, v.side, v.x_dot_n
            ),
            None => format!(
                "trace value {:.3e}, strict band to d = {:.4}",
                band.trace_value, band.d_safe_measured
            ),
        },
    );

    let mut table = Table::new("signband.csv", &["side", "distance", "theta", "x_dot_n"]);
    for s in &band.samples {
        table.push(vec![
            side_name(s.side).into(),
            real(s.distance),
            real(s.theta),
            real(s.x_dot_n),
        ]);
    }
    let results = json!({
        "leaves": leaves,
        "divergence": { "h": DIVERGENCE_STEP, "max_residual": coarse, "max_residual_half_step": fine, "ratio": ratio },
        "gauss_green": gg,
        "sign_band": {
            "k": band.k,
            "upsilon": band.upsilon,
            "trace_value": band.trace_value,
            "band": band.band,
            "n_side_positive": band.n_side_positive,
            "far_side_negative": band.far_side_negative,
            "first_violation": band.first_violation,
            "bump_crest": band.bump_crest,
            "d_safe_claimed": band.d_safe_claimed,
            "d_safe_measured": band.d_safe_measured,
            "pass": band.pass,
        },
    });
    Ok((results, vec![table]))
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::AboveDiagonal => "above_diagonal",
        Side::BelowDiagonal => "below_diagonal",
    }
}

fn compare(config: &RunConfig, ctx: &mut Run) -> Result<(Value, Vec<Table>)> {
    let params = config.params();
    let field = build_field(config, ctx)?;

    let cone = ctx.stage("cone", || {
        let curve = make_competitor(&Perturbation::zero(), &params)?;
        Ok(minimality_check(&curve, &params, &field)?)
    })?;
    ctx.check(
        "cone_equality",
        cone.slack.abs() <= CONE_SLACK_TOL,
        format!("cone slack {:.3e}, tol {CONE_SLACK_TOL:e}", cone.slack),
    );

    let rows: Vec<(u64, Result<MinimalityReport, String>)> = ctx.stage("competitors", || {
        Ok(config
            .seeds
            .par_iter()
            .map(|&seed| {
                let out = make_competitor(&Perturbation::random(seed, &params), &params)
                    .map_err(|e| e.to_string())
                    .and_then(|c| minimality_check(&c, &params, &field).map_err(|e| e.to_string()));
                (seed, out)
            })
            .collect())
    })?;
    let failing: Vec<String> = rows
        .iter()
        .filter_map(|(seed, r)| match r {
            Ok(r) if r.pass => None,
            Ok(r) => Some(format!(
                "seed {seed}: slack {:.3e}, in regime {}",
                r.slack, r.in_regime
            )),
            Err(e) => Some(format!("seed {seed}: {e}")),
        })
        .collect();
    let min_slack = rows
        .iter()
        .filter_map(|(_, r)| r.as_ref().ok().map(|r| r.slack))
        .fold(f64::INFINITY, f64::min);
    ctx.check(
        "competitors",
        failing.is_empty(),
        if failing.is_empty() {
            format!("{} competitors, minimum slack {min_slack:.3e}", rows.len())
        } else {
            failing.join("; ")
        },
    );

    let mut table = Table::new(
        "minimality.csv",
        &[
            "seed",
            "lhs",
            "cone_area",
            "flux_lost",
            "flux_gained",
            "rhs",
            "slack",
            "defect",
            "flux_gap",
            "endpoint_theta",
            "endpoint_distance",
            "in_regime",
            "pass",
        ],
    );
    let mut json_rows = Vec::new();
    for (seed, r) in &rows {
        match r {
            Ok(r) => {
                table.push(vec![
                    seed.to_string(),
                    real(r.lhs),
                    real(r.cone_area),
                    real(r.flux_lost),
                    real(r.flux_gained),
                    real(r.rhs),
                    real(r.slack),
                    real(r.defect),
                    real(r.flux_gap),
                    real(r.endpoint_theta),
                    real(r.endpoint_distance),
                    flag(r.in_regime),
                    flag(r.pass),
                ]);
                json_rows.push(json!({ "seed": seed, "report": r }));
            }
            Err(e) => {
                let mut row = vec![seed.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 11));
                row.push(flag(false));
                table.push(row);
                json_rows.push(json!({ "seed": seed, "error": e }));
            }
        }
    }
    Ok((
        json!({ "cone": cone, "competitors": json_rows }),
        vec![table],
    ))
}

fn compact_analog(config: &RunConfig, ctx: &mut Run) -> Result<(Value, Vec<Table>)> {
    let mut kappas = config.kappa_values.clone();
    kappas.sort_by(f64::total_cmp);
    kappas.dedup();
    let values = ctx.stage("compact analog", || {
        kappas
            .iter()
            .map(|&k| Ok((k, compact_analog_eigenvalue(k)?)))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut table = Table::new(
        "compact_analog.csv",
        &[
            "kappa",
            "delta1",
            "asymptotic",
            "deviation",
            "bound",
            "within_bound",
        ],
    );
    let mut outside = Vec::new();
    let mut rows = Vec::new();
    for &(kappa, delta) in &values {
        let asymptotic = PI * PI * (1.0 + 2.0 / kappa);
        let deviation = delta - asymptotic;
        let bound = 5.0 * PI * PI / (kappa * kappa);
        let within = deviation.abs() <= bound;
        if !within {
            outside.push(kappa);
        }
        table.push(vec![
            real(kappa),
            real(delta),
            real(asymptotic),
            real(deviation),
            real(bound),
            flag(within),
        ]);
        rows.push(json!({
            "kappa": kappa, "delta1": delta, "asymptotic": asymptotic,
            "deviation": deviation, "bound": bound, "within_bound": within,
        }));
    }
    ctx.check(
        "asymptotic_bound",
        outside.is_empty(),
        if outside.is_empty() {
            format!("{} values within 5 pi^2 / kappa^2", values.len())
        } else {
            format!("deviation exceeds 5 pi^2 / kappa^2 at kappa = {outside:?}")
        },
    );

    let fit = if values.len() >= 2 {
        let (c1, c2) = fit_first_order_coefficient(&values)?;
        ctx.check(
            "first_order_coefficient",
            (1.9..=2.1).contains(&c1),
            format!("fitted coefficient {c1:.6}, expected within [1.9, 2.1]"),
        );
        json!({ "c1": c1, "c2": c2 })
    } else {
        Value::Null
    };
    Ok((json!({ "rows": rows, "fit": fit }), vec![table]))
}
