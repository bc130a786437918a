//! Acceptance suite: one line per criterion, nonzero exit status if any fails.

use std::f64::consts::TAU;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use adaptnet::analysis::{
    gronwall_ic_check, gronwall_omega_check, positivity_monitor, self_convergence_study, BoundParams,
    ConvergenceSetup,
};
use adaptnet::dynamics::{sync_manifold_solution, weights_exact_update, DiscreteSystem, SystemState};
use adaptnet::graphon::{
    berner_horizon_bound, discretize_phases, discretize_weights_average, refine, Horizon, Kernel, Partition,
    StepGraphon,
};
use adaptnet::metrics::{d_interval_infty, order_parameter, state_distance, tv_step_distance};
use adaptnet::model::{make_berner, CouplingSpec, FrequencySpec, ModelSpec};
use adaptnet::Result;
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn berner() -> ModelSpec {
    make_berner(1.0, 0.3, 0.7, 0.05, 0.0, 4.0).unwrap()
}

fn cosine_kernel() -> Kernel {
    Kernel::cosine_shift(1.0, 0.5)
}

fn initial(model: &ModelSpec, n: usize, phi0: impl Fn(f64) -> f64) -> (DiscreteSystem, SystemState) {
    let p = Partition::new(n).unwrap();
    let w0 = discretize_weights_average(&cosine_kernel(), p, 4);
    let state = SystemState::new(model.t0(), discretize_phases(phi0, p, 4), w0).unwrap();
    (DiscreteSystem::new(model.clone(), p, 4), state)
}

fn sync_manifold() -> Result<Outcome> {
    let model = make_berner(1.0, 0.3, 0.7, 0.05, 0.0, 5.0)?;
    let sys = DiscreteSystem::new(model.clone(), Partition::new(16)?, 4);
    let tr = sys.integrate(&SystemState::uniform(0.0, 16, 0.5, 1.0)?, 1e-3, 50)?;
    let mut worst: f64 = 0.0;
    for s in tr.states() {
        let (phi, w) = sync_manifold_solution(0.5, 1.0, &model, s.t())?;
        for p in s.phase_values() {
            worst = worst.max((p - phi).abs());
        }
        for v in s.weights().weights() {
            worst = worst.max((v - w).abs());
        }
    }
    outcome(worst <= 1e-6, format!("max deviation {worst:.3e} <= 1e-6"))
}

fn integrating_factor() -> Result<Outcome> {
    let model = ModelSpec::new(
        CouplingSpec::zero(),
        CouplingSpec::sine_lag(1.0, 0.7),
        FrequencySpec::constant(0.0),
        0.01,
        0.0,
        10.0,
    )?;
    let n = 16;
    let phases = Array1::from_shape_fn(n, |i| TAU * i as f64 / n as f64 + 0.1 * (i as f64).sin());
    let weights = Array2::from_shape_fn((n, n), |(i, j)| 0.5 + 0.25 * ((i + 2 * j) as f64).cos());
    let init = SystemState::from_arrays(0.0, phases, weights)?;
    let tr = DiscreteSystem::new(model.clone(), init.partition(), 4).integrate(&init, 1e-2, 1)?;
    let states = tr.states();
    let mut worst: f64 = 0.0;
    for end in [states.len() / 4, states.len() / 2, states.len()] {
        let exact = weights_exact_update(init.weights(), &states[..end], &model)?;
        let rk = states[end - 1].weights().weights();
        for (a, b) in exact.weights().iter().zip(rk.iter()) {
            worst = worst.max((a - b).abs());
        }
    }
    outcome(worst <= 1e-8, format!("max entry deviation {worst:.3e} <= 1e-8"))
}

fn self_convergence() -> Result<Outcome> {
    let setup = ConvergenceSetup {
        kernel: cosine_kernel(),
        model: berner(),
        ns: vec![8, 16, 32, 64, 128],
        n_ref: 512,
        dt: 2e-3,
        dt_ref: 5e-4,
        stride: 100,
        quadrature: 4,
    };
    let report = self_convergence_study(&setup, |x| TAU * x)?;
    let errors = report.errors();
    let decreasing = errors.windows(2).all(|p| p[1] < p[0]);
    let ratio = errors[errors.len() - 1] / errors[0];
    let listed: Vec<String> = errors.iter().map(|e| format!("{e:.4}")).collect();
    outcome(
        decreasing && ratio < 0.25,
        format!(
            "errors [{}] strictly decreasing: {decreasing}, error(128)/error(8) = {ratio:.4} < 0.25",
            listed.join(", ")
        ),
    )
}

fn positivity() -> Result<Outcome> {
    let model = berner();
    let (sys, init) = initial(&model, 128, |x| TAU * x);
    let report = positivity_monitor(&sys.integrate(&init, 2e-3, 10)?);
    let horizon = berner_horizon_bound(cosine_kernel().inf_bound(), model.epsilon())?;
    let bound = match horizon {
        Horizon::Finite(b) => b,
        Horizon::Unbounded => f64::INFINITY,
    };
    outcome(
        report.condition_held && report.min_weight > 0.0 && report.passed && horizon.admits(model.horizon()),
        format!(
            "inf W0 {:.4} >= threshold {:.4}, min weight {:.4} > 0, T = 4 < {bound:.4}",
            report.inf_initial, report.threshold, report.min_weight
        ),
    )
}

fn gronwall() -> Result<Outcome> {
    let model = berner();
    let (sys, base) = initial(&model, 32, |x| TAU * x);
    let (_, perturbed) = initial(&model, 32, |x| TAU * x + 1e-3 * (TAU * x).sin());
    let bounds = BoundParams::from_model(&model, base.weights());
    let reference = sys.integrate(&base, 2e-3, 10)?;
    let ic = gronwall_ic_check(&reference, &sys.integrate(&perturbed, 2e-3, 10)?, &bounds)?;
    let shifted = model.with_omega(model.omega.shifted(0.01));
    let other = DiscreteSystem::new(shifted, base.partition(), 4).integrate(&base, 2e-3, 10)?;
    let om = gronwall_omega_check(&reference, &other, &bounds)?;
    outcome(
        ic.passed && om.passed,
        format!(
            "C1 = {:.4}, initial-condition margin {:.3e}, frequency margin {:.3e} over {} snapshots",
            bounds.c1(),
            ic.tightest_margin,
            om.tightest_margin,
            ic.samples.len()
        ),
    )
}

fn picard() -> Result<Outcome> {
    let model = berner().with_horizon(0.5)?;
    let (sys, init) = initial(&model, 8, |x| TAU * x);
    let sol = sys.picard_solve(&init, 1e-3, 1e-6, 100)?;
    let rk = sys.integrate(&init, 1e-3, 1)?;
    let d = d_interval_infty(sol.trajectory.states(), rk.states())?;
    outcome(
        d <= 1e-5,
        format!(
            "d = {d:.3e} <= 1e-5 ({} windows, M3 = {:.3})",
            sol.windows.len(),
            sol.m3
        ),
    )
}

fn step_graphon(n: usize, values: &[f64]) -> StepGraphon {
    StepGraphon::new(
        Partition::new(n).unwrap(),
        Array2::from_shape_fn((n, n), |(i, j)| values[(i * n + j) % values.len()]),
    )
    .unwrap()
}

fn run_property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> std::result::Result<(), TestCaseError>,
) -> std::result::Result<(), String> {
    let mut runner = TestRunner::new_with_rng(
        Config {
            cases: 100,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    );
    runner.run(&strategy, test).map_err(|e| format!("{name}: {e}"))
}

fn properties() -> Result<Outcome> {
    let entries = || proptest::collection::vec(-3.0..3.0f64, 36);
    let results = [
        run_property(
            "tv pseudometric",
            (1usize..7, 1usize..7, 1usize..7, entries(), entries(), entries()),
            |(n1, n2, n3, a, b, c)| {
                let (f, g, h) = (step_graphon(n1, &a), step_graphon(n2, &b), step_graphon(n3, &c));
                prop_assert_eq!(tv_step_distance(&f, &f), 0.0);
                prop_assert_eq!(tv_step_distance(&f, &g), tv_step_distance(&g, &f));
                prop_assert!(tv_step_distance(&f, &h) <= tv_step_distance(&f, &g) + tv_step_distance(&g, &h) + 1e-12);
                Ok(())
            },
        ),
        run_property(
            "tv refinement invariance",
            (1usize..6, 1usize..6, entries(), entries()),
            |(n, m, a, b)| {
                let (f, g) = (step_graphon(n, &a), step_graphon(n, &b));
                let refined = tv_step_distance(&refine(&f, n * m).unwrap(), &refine(&g, n * m).unwrap());
                prop_assert_eq!(tv_step_distance(&f, &g), refined);
                Ok(())
            },
        ),
        run_property(
            "time-uniform distance dominates snapshots",
            (1usize..5, proptest::collection::vec(-3.0..3.0f64, 40)),
            |(n, v)| {
                let state = |k: usize, shift: f64| {
                    SystemState::from_arrays(
                        k as f64,
                        Array1::from_shape_fn(n, |i| v[(i + k) % 40] + shift),
                        Array2::from_shape_fn((n, n), |(i, j)| v[(i * n + j + 3 * k) % 40] * shift),
                    )
                    .unwrap()
                };
                let a: Vec<_> = (0..4).map(|k| state(k, 0.0)).collect();
                let b: Vec<_> = (0..4).map(|k| state(k, v[k])).collect();
                let sup = d_interval_infty(&a, &b).unwrap();
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!(state_distance(x, y).total <= sup);
                }
                Ok(())
            },
        ),
        run_property(
            "order parameter rotation invariance",
            (proptest::collection::vec(-10.0..10.0f64, 1..20), -10.0..10.0f64),
            |(phases, theta)| {
                let r = order_parameter(&phases).r;
                let rotated: Vec<f64> = phases.iter().map(|p| p + theta).collect();
                prop_assert!((order_parameter(&rotated).r - r).abs() <= 1e-12);
                Ok(())
            },
        ),
        run_property(
            "a-priori weight bound",
            (1usize..6, -3.0..3.0f64, -3.0..3.0f64, 0.0..1.0f64, -2.0..2.0f64, entries(), entries()),
            |(n, a, b, eps, omega, phi, w)| {
                let model = make_berner(omega, a, b, eps, 0.0, 2.0).unwrap();
                let init = SystemState::from_arrays(
                    0.0,
                    Array1::from_shape_fn(n, |i| phi[i]),
                    Array2::from_shape_fn((n, n), |(i, j)| w[i * 6 + j]),
                )
                .unwrap();
                let tr = DiscreteSystem::new(model, init.partition(), 4).integrate(&init, 0.02, 5).unwrap();
                let bound = init.weights().max_abs_entry() + 1.0;
                for s in tr.states() {
                    prop_assert!(s.weights().max_abs_entry() <= bound * (1.0 + 1e-12));
                }
                Ok(())
            },
        ),
    ];
    let failures: Vec<String> = results.into_iter().filter_map(|r| r.err()).collect();
    outcome(
        failures.is_empty(),
        if failures.is_empty() {
            "5 properties x 100 cases".to_string()
        } else {
            failures.join("; ")
        },
    )
}

type Criterion = (&'static str, Duration, fn() -> Result<Outcome>);

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("sync-manifold oracle", Duration::from_secs(1), sync_manifold),
        ("integrating-factor oracle", Duration::from_secs(1), integrating_factor),
        ("self-convergence", Duration::from_secs(60), self_convergence),
        ("positivity", Duration::from_secs(60), positivity),
        ("gronwall envelopes", Duration::from_secs(5), gronwall),
        ("picard equivalence", Duration::from_secs(10), picard),
        ("metric and bound properties", Duration::from_secs(30), properties),
    ];
    let mut all = true;
    for (k, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = run();
        let elapsed = start.elapsed();
        let (passed, detail) = match result {
            Ok(o) => (o.passed && elapsed < *limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        all &= passed;
        println!(
            "criterion {}: {} {name}: {detail} [{:.2}s < {}s]",
            k + 1,
            if passed { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            limit.as_secs()
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
