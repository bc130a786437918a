//! Closed forms used as oracles for the stepper.

use ndarray::Array2;

use super::pairs::{with_pair, PairEval, Pairs, Trig};
use super::state::SystemState;
use crate::error::{invalid, Error, Result};
use crate::graphon::StepGraphon;
use crate::model::{CouplingFamily, FrequencyFamily, ModelSpec};

/// Integrating-factor form of the weight equation along a phase history,
///
/// ```text
/// W(t) = e^{-ε(t-t0)} W(t0) - ε ∫_{t0}^{t} e^{-ε(t-τ)} H(φ_i(τ), φ_j(τ)) dτ
/// ```
///
/// with `t0`, `t` the first and last history times and the integral taken by
/// the trapezoid rule on the history grid. Only times and phases of the
/// history are read.
pub fn weights_exact_update(w0: &StepGraphon, history: &[SystemState], model: &ModelSpec) -> Result<StepGraphon> {
    let first = history
        .first()
        .ok_or_else(|| invalid("history", "phase history must not be empty"))?;
    let n = w0.n();
    if let Some(bad) = history.iter().find(|s| s.n() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.n(),
        });
    }
    let eps = model.epsilon();
    let t0 = first.t();
    let t = history.last().expect("non-empty").t();

    let mut integral = Array2::<f64>::zeros((n, n));
    let mut previous: Option<(f64, Array2<f64>)> = None;
    for state in history {
        let phases = state.phase_values();
        let trig = Trig::new(phases);
        let hp = Pairs::new(&model.plasticity, phases, &trig);
        let factor = (-eps * (t - state.t())).exp();
        let forcing = with_pair!(hp, |h| Array2::from_shape_fn((n, n), |(i, j)| factor * h.at(i, j)));
        if let Some((tp, fp)) = previous {
            let half = 0.5 * (state.t() - tp);
            integral.zip_mut_with(&fp, |acc, &a| *acc += half * a);
            integral.zip_mut_with(&forcing, |acc, &b| *acc += half * b);
        }
        previous = Some((state.t(), forcing));
    }

    let decay = (-eps * (t - t0)).exp();
    let w = w0.weights() * decay - &(integral * eps);
    StepGraphon::new(w0.partition(), w)
}

/// Exact solution when all phases start at `phi0` and all weights at `w0`,
/// for constant `ω` and sine-lag `D`, `H`. Returns `(φ(t), w(t))`.
pub fn sync_manifold_solution(phi0: f64, w0: f64, model: &ModelSpec, t: f64) -> Result<(f64, f64)> {
    let omega = match model.omega.family() {
        FrequencyFamily::Constant(w) => *w,
        _ => return Err(Error::UnsupportedModel("the synchronized closed form needs constant ω")),
    };
    let sine = |family: &CouplingFamily| match family {
        CouplingFamily::SineLag { amplitude, lag } => Ok(amplitude * lag.sin()),
        CouplingFamily::Tabulated(_) => Err(Error::UnsupportedModel(
            "the synchronized closed form needs sine-lag couplings",
        )),
    };
    let d = sine(model.coupling.family())?;
    let h = sine(model.plasticity.family())?;
    let eps = model.epsilon();
    let tau = t - model.t0();

    let shifted = w0 + h;
    let w = shifted * (-eps * tau).exp() - h;
    let relaxed = if eps == 0.0 {
        tau
    } else {
        -(-eps * tau).exp_m1() / eps
    };
    let phi = phi0 + omega * tau + d * (shifted * relaxed - h * tau);
    Ok((phi, w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::DiscreteSystem;
    use crate::graphon::Partition;
    use crate::model::{make_berner, CouplingSpec, FrequencySpec};
    use approx::assert_relative_eq;
    use ndarray::Array1;
    use std::f64::consts::FRAC_PI_2;

    fn frozen_history(n: usize, t0: f64, t: f64, points: usize) -> Vec<SystemState> {
        (0..points)
            .map(|k| {
                let tk = t0 + (t - t0) * k as f64 / (points - 1) as f64;
                SystemState::from_arrays(tk, Array1::from_elem(n, 0.3), Array2::zeros((n, n))).unwrap()
            })
            .collect()
    }

    #[test]
    fn constant_forcing_relaxes_exponentially() {
        let h = 0.6;
        let model = ModelSpec::new(
            CouplingSpec::zero(),
            CouplingSpec::sine_lag(h / 0.5f64.sin(), 0.5),
            FrequencySpec::constant(0.0),
            0.01,
            2.0,
            10.0,
        )
        .unwrap();
        let history = frozen_history(3, 2.0, 12.0, 1001);
        let w0 = StepGraphon::constant(Partition::new(3).unwrap(), 0.0);
        let w = weights_exact_update(&w0, &history, &model).unwrap();
        let expected = -(1.0 - (-0.1f64).exp()) * h;
        for v in w.weights() {
            assert_relative_eq!(*v, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn pure_decay_and_identity_at_start() {
        let model = ModelSpec::new(
            CouplingSpec::zero(),
            CouplingSpec::zero(),
            FrequencySpec::constant(0.0),
            0.01,
            0.0,
            10.0,
        )
        .unwrap();
        let w0 = StepGraphon::constant(Partition::new(2).unwrap(), 1.0);
        let w = weights_exact_update(&w0, &frozen_history(2, 0.0, 10.0, 3), &model).unwrap();
        for v in w.weights() {
            assert_relative_eq!(*v, 0.904837418, epsilon = 1e-9);
        }
        let at_start = weights_exact_update(&w0, &frozen_history(2, 0.0, 10.0, 3)[..1], &model).unwrap();
        assert_eq!(at_start, w0);
    }

    #[test]
    fn closed_form_special_cases() {
        let m = make_berner(0.7, 0.0, 0.4, 0.2, 1.0, 5.0).unwrap();
        let (phi, _) = sync_manifold_solution(0.1, 3.0, &m, 4.0).unwrap();
        assert_relative_eq!(phi, 0.1 + 0.7 * 3.0, epsilon = 1e-14);

        let m = make_berner(0.0, FRAC_PI_2, 0.0, 0.0, 0.0, 5.0).unwrap();
        let (phi, w) = sync_manifold_solution(0.2, 1.0, &m, 2.5).unwrap();
        assert_relative_eq!(phi, 2.7, epsilon = 1e-14);
        assert_eq!(w, 1.0);

        let b: f64 = 0.9;
        let m = make_berner(0.0, 0.3, b, 0.5, 0.0, 5.0).unwrap();
        let (_, w) = sync_manifold_solution(0.0, 2.0, &m, 200.0).unwrap();
        assert_relative_eq!(w, -b.sin(), epsilon = 1e-12);
    }

    #[test]
    fn small_epsilon_approaches_the_static_limit() {
        let m0 = make_berner(0.4, 1.0, -0.3, 0.0, 0.0, 5.0).unwrap();
        let m1 = make_berner(0.4, 1.0, -0.3, 1e-9, 0.0, 5.0).unwrap();
        let a = sync_manifold_solution(0.5, 1.5, &m0, 3.0).unwrap();
        let b = sync_manifold_solution(0.5, 1.5, &m1, 3.0).unwrap();
        assert_relative_eq!(a.0, b.0, epsilon = 1e-7);
        assert_relative_eq!(a.1, b.1, epsilon = 1e-7);
    }

    #[test]
    fn rk4_tracks_the_synchronized_solution() {
        let model = make_berner(0.8, 0.6, -0.4, 0.3, 0.0, 5.0).unwrap();
        let sys = DiscreteSystem::new(model.clone(), Partition::new(4).unwrap(), 4);
        let tr = sys.integrate(&SystemState::uniform(0.0, 4, 0.25, 1.2).unwrap(), 1e-3, 100).unwrap();
        for s in tr.states() {
            let (phi, w) = sync_manifold_solution(0.25, 1.2, &model, s.t()).unwrap();
            for p in s.phase_values() {
                assert!((p - phi).abs() <= 1e-6);
            }
            for v in s.weights().weights() {
                assert!((v - w).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn rejects_non_sine_models() {
        let m = make_berner(0.0, 0.1, 0.1, 0.1, 0.0, 1.0).unwrap().with_omega(FrequencySpec::affine(0.0, 1.0));
        assert!(matches!(sync_manifold_solution(0.0, 0.0, &m, 0.5), Err(Error::UnsupportedModel(_))));
    }
}
