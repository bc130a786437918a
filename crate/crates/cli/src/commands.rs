//! The four workflows. Each writes its artifacts into the output directory
//! and reports whether its checks passed.

use std::fs;
use std::path::{Path, PathBuf};

use adaptnet::analysis::{bounds_report, positivity_monitor, self_convergence_study, ConvergenceSetup};
use adaptnet::dynamics::{
    sync_manifold_solution, weights_exact_update, write_trajectory_csv, DiscreteSystem, Trajectory,
    TrajectoryCsvOptions,
};
use adaptnet::fmt_real;
use adaptnet::graphon::{check_assumptions, Kernel, KernelFamily, Partition};
use adaptnet::metrics::{d_interval_infty, order_parameter};
use adaptnet::model::{CouplingFamily, FrequencyFamily};
use serde::Serialize;
use serde_json::json;

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub passed: bool,
    pub files: Vec<PathBuf>,
    pub summary: String,
}

fn output_dir(cfg: &RunConfig) -> Result<&Path, CliError> {
    let dir = cfg.output.dir.as_path();
    fs::create_dir_all(dir).map_err(|source| CliError::Output {
        path: dir.display().to_string(),
        source,
    })?;
    Ok(dir)
}

fn write_text(path: PathBuf, text: &str, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    fs::write(&path, text).map_err(|source| CliError::Output {
        path: path.display().to_string(),
        source,
    })?;
    files.push(path);
    Ok(())
}

fn write_json(path: PathBuf, value: &impl Serialize, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(path, &text, files)
}

fn order_parameter_csv(tr: &Trajectory) -> String {
    let mut out = String::from("t,r,psi\n");
    for s in tr.states() {
        let op = order_parameter(s.phase_values());
        out.push_str(&format!("{},{},{}\n", fmt_real(s.t()), fmt_real(op.r), fmt_real(op.psi)));
    }
    out
}

#[derive(Debug, Serialize)]
struct SyncCheck {
    phi0: f64,
    w0: f64,
    max_deviation: f64,
    tolerance: f64,
    passed: bool,
}

/// Compares against the closed form when the initial data and model keep
/// the run on the synchronized manifold.
fn sync_check(cfg: &RunConfig, kernel: &Kernel, tr: &Trajectory) -> Result<Option<SyncCheck>, CliError> {
    let model = tr.model();
    let on_manifold = matches!(kernel.family(), KernelFamily::Constant(_))
        && cfg.phase_profile().is_constant()
        && matches!(model.omega.family(), FrequencyFamily::Constant(_))
        && matches!(model.coupling.family(), CouplingFamily::SineLag { .. })
        && matches!(model.plasticity.family(), CouplingFamily::SineLag { .. });
    if !on_manifold {
        return Ok(None);
    }
    let init = tr.initial();
    let (phi0, w0) = (init.phase_values()[0], init.weights().weights()[(0, 0)]);
    let mut max_deviation: f64 = 0.0;
    for s in tr.states() {
        let (phi, w) = sync_manifold_solution(phi0, w0, model, s.t())?;
        for p in s.phase_values() {
            max_deviation = max_deviation.max((p - phi).abs());
        }
        for v in s.weights().weights() {
            max_deviation = max_deviation.max((v - w).abs());
        }
    }
    let tolerance = cfg.numerics.sync_tolerance;
    Ok(Some(SyncCheck {
        phi0,
        w0,
        max_deviation,
        tolerance,
        passed: max_deviation <= tolerance,
    }))
}

/// Integrates one resolution and writes the trajectory, the order parameter
/// series, the positivity report and a summary.
pub fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model_spec()?;
    let kernel = cfg.kernel()?;
    let n = cfg.n()?;
    let init = cfg.initial_state(&model, &kernel, n)?;
    let assumptions = check_assumptions(&kernel, &model);
    let sys = DiscreteSystem::new(model.clone(), Partition::new(n)?, cfg.numerics.quadrature);
    let tr = sys.integrate(&init, cfg.numerics.dt, cfg.numerics.stride)?;

    let dir = output_dir(cfg)?;
    let mut files = Vec::new();
    if cfg.output.trajectory {
        let path = dir.join("trajectory.csv");
        let options = TrajectoryCsvOptions {
            include_weights: cfg.output.weights,
            wrap_phases: cfg.output.wrap_phases,
        };
        write_trajectory_csv(&tr, &path, options).map_err(|e| match e {
            adaptnet::Error::Io(source) => CliError::Output {
                path: path.display().to_string(),
                source,
            },
            other => other.into(),
        })?;
        files.push(path);
    }
    if cfg.output.order_parameter {
        write_text(dir.join("order_parameter.csv"), &order_parameter_csv(&tr), &mut files)?;
    }
    let positivity = positivity_monitor(&tr);
    write_json(dir.join("positivity.json"), &positivity, &mut files)?;
    let sync = sync_check(cfg, &kernel, &tr)?;

    let r_initial = order_parameter(tr.initial().phase_values()).r;
    let r_final = order_parameter(tr.last().phase_values()).r;
    let passed = assumptions.all_passed() && positivity.passed && sync.as_ref().map_or(true, |s| s.passed);
    let summary = json!({
        "model": model.to_string(),
        "n": n,
        "dt": cfg.numerics.dt,
        "stride": cfg.numerics.stride,
        "snapshots": tr.states().len(),
        "t_final": tr.last().t(),
        "min_weight": positivity.min_weight,
        "r_initial": r_initial,
        "r_final": r_final,
        "positivity_passed": positivity.passed,
        "assumptions_passed": assumptions.all_passed(),
        "assumptions": assumptions,
        "sync_manifold": sync,
        "passed": passed,
    });
    write_json(dir.join("summary.json"), &summary, &mut files)?;
    let failed: Vec<String> = assumptions
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| format!("{} failed (margin {:.6e}): {}", c.id, c.margin, c.detail))
        .collect();
    let mut text = format!(
        "simulated n = {n} to t = {} ({} snapshots); min weight {:.6e}; r {:.6} -> {:.6}",
        tr.last().t(),
        tr.states().len(),
        positivity.min_weight,
        r_initial,
        r_final
    );
    for line in failed {
        text.push('\n');
        text.push_str(&line);
    }
    Ok(Outcome {
        passed,
        files,
        summary: text,
    })
}

/// Self-convergence study over `numerics.ns` against `numerics.n_ref`.
pub fn converge(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let missing = |name: &str| CliError::Validation(format!("numerics.{name}: required by converge"));
    let num = &cfg.numerics;
    let setup = ConvergenceSetup {
        kernel: cfg.kernel()?,
        model: cfg.model_spec()?,
        ns: num.ns.clone().ok_or_else(|| missing("ns"))?,
        n_ref: num.n_ref.ok_or_else(|| missing("n_ref"))?,
        dt: num.dt,
        dt_ref: num.dt_ref.ok_or_else(|| missing("dt_ref"))?,
        stride: num.stride,
        quadrature: num.quadrature,
    };
    let profile = cfg.phase_profile();
    let report = self_convergence_study(&setup, |x| profile.eval(x))?;

    let dir = output_dir(cfg)?;
    let mut files = Vec::new();
    write_json(dir.join("convergence.json"), &report, &mut files)?;
    write_text(dir.join("convergence.csv"), &report.to_csv()?, &mut files)?;
    let errors: Vec<String> = report
        .records
        .iter()
        .map(|r| format!("n = {}: {:.6e}", r.n, r.error))
        .collect();
    Ok(Outcome {
        passed: report.monotone,
        files,
        summary: format!(
            "errors {}: {}; monotone: {}",
            report.compared_against,
            errors.join(", "),
            report.monotone
        ),
    })
}

/// Checks RK4 against the Picard solver and the integrating-factor weights.
pub fn verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model_spec()?;
    let kernel = cfg.kernel()?;
    let n = cfg.n()?;
    let v = &cfg.verify;
    if n > v.max_n {
        return Err(CliError::Validation(format!(
            "numerics.n: {n} exceeds verify.max_n = {}",
            v.max_n
        )));
    }
    if model.horizon() > v.max_horizon {
        return Err(CliError::Validation(format!(
            "model.horizon: {} exceeds verify.max_horizon = {}",
            model.horizon(),
            v.max_horizon
        )));
    }
    let init = cfg.initial_state(&model, &kernel, n)?;
    let sys = DiscreteSystem::new(model.clone(), Partition::new(n)?, cfg.numerics.quadrature);
    let rk = sys.integrate(&init, cfg.numerics.dt, 1)?;
    let picard = sys.picard_solve(&init, cfg.numerics.dt, v.picard_tol, v.picard_max_iter)?;
    let picard_distance = d_interval_infty(picard.trajectory.states(), rk.states())?;
    let exact = weights_exact_update(init.weights(), rk.states(), &model)?;
    let exact_deviation = exact
        .weights()
        .iter()
        .zip(rk.last().weights().weights().iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let picard_passed = picard_distance <= v.picard_tolerance;
    let exact_passed = exact_deviation <= v.exact_tolerance;
    let report = json!({
        "model": model.to_string(),
        "n": n,
        "dt": cfg.numerics.dt,
        "picard_vs_rk4": {
            "distance": picard_distance,
            "tolerance": v.picard_tolerance,
            "passed": picard_passed,
            "iteration_tol": v.picard_tol,
            "m3": picard.m3,
            "t_star": picard.t_star,
            "windows": picard.windows,
        },
        "exact_update_vs_rk4": {
            "max_entry_deviation": exact_deviation,
            "tolerance": v.exact_tolerance,
            "passed": exact_passed,
        },
        "passed": picard_passed && exact_passed,
    });
    let dir = output_dir(cfg)?;
    let mut files = Vec::new();
    write_json(dir.join("verify.json"), &report, &mut files)?;
    Ok(Outcome {
        passed: picard_passed && exact_passed,
        files,
        summary: format!(
            "picard vs rk4: {picard_distance:.3e} (tolerance {:.1e}); exact update vs rk4: {exact_deviation:.3e} (tolerance {:.1e})",
            v.picard_tolerance, v.exact_tolerance
        ),
    })
}

/// Positivity threshold, horizon bound and the Gronwall/Picard constants.
pub fn bounds(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let model = cfg.model_spec()?;
    let kernel = cfg.kernel()?;
    let n = cfg.n()?;
    let w0 = cfg.initial_weights(&kernel, Partition::new(n)?);
    let report = bounds_report(&model, &w0, kernel.inf_bound());
    let dir = output_dir(cfg)?;
    let mut files = Vec::new();
    write_json(dir.join("bounds.json"), &report, &mut files)?;
    Ok(Outcome {
        passed: true,
        files,
        summary: serde_json::to_string_pretty(&report)?,
    })
}
