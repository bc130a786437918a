//! Fixed-point solver built on the integral operator
//!
//! ```text
//! A¹(φ, W)_i(t)  = φ_i(t0) + ∫_{t0}^{t} ω_i + (1/n) Σ_j W_ij D(φ_i, φ_j) dτ
//! A²(φ, W)_ij(t) = W_ij(t0) - ε ∫_{t0}^{t} W_ij + H(φ_i, φ_j) dτ
//! ```
//!
//! with trapezoid quadrature in time. Solving on short windows keeps the
//! operator a contraction with factor `1/2`.

use ndarray::{Array1, Array2};
use serde::Serialize;

use super::pairs::{with_pairs, PairEval, Pairs, Trig};
use super::state::{SystemState, Trajectory};
use super::system::DiscreteSystem;
use crate::error::{invalid, Error, Result};
use crate::metrics::state_distance;
use crate::model::ModelSpec;

/// `M₃ = 4 (Lip ω + Lip D + ‖D‖∞ + ε (1 + Lip H)) (‖η₀‖ + σ)` with
/// `σ = ‖H‖∞ + ‖η₀‖`, where `‖η₀‖` is the fiber TV norm of the initial
/// weights.
pub fn contraction_constant(model: &ModelSpec, eta0_norm: f64) -> f64 {
    let sigma = model.plasticity.sup_norm() + eta0_norm;
    let rates = model.omega.lipschitz()
        + model.coupling.lipschitz()
        + model.coupling.sup_norm()
        + model.epsilon() * (1.0 + model.plasticity.lipschitz());
    4.0 * rates * (eta0_norm + sigma)
}

#[derive(Debug, Clone, Serialize)]
pub struct PicardWindow {
    pub start: f64,
    pub steps: usize,
    /// Iterates produced before successive iterates differed by less than
    /// the tolerance.
    pub iterations: usize,
    pub final_change: f64,
}

#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub trajectory: Trajectory,
    pub windows: Vec<PicardWindow>,
    pub m3: f64,
    pub t_star: f64,
}

impl DiscreteSystem {
    /// One application of the operator to `candidate`, a state sequence on a
    /// fixed time grid whose first time is that of `initial`.
    pub fn picard_apply(&self, candidate: &[SystemState], initial: &SystemState) -> Result<Vec<SystemState>> {
        let first = candidate
            .first()
            .ok_or_else(|| invalid("candidate", "candidate must not be empty"))?;
        if (first.t() - initial.t()).abs() > 1e-12 * initial.t().abs().max(1.0) {
            return Err(Error::TimeMismatch {
                index: 0,
                left: first.t(),
                right: initial.t(),
            });
        }
        if let Some(bad) = candidate.iter().chain([initial]).find(|s| s.n() != self.n()) {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: bad.n(),
            });
        }

        let n = self.n();
        let eps = self.model().epsilon();
        let omega = self.frequencies();
        let mut phases = initial.phases().values().clone();
        let mut weights = initial.weights().weights().clone();
        let mut out = Vec::with_capacity(candidate.len());
        out.push(SystemState::new(initial.t(), initial.phases().clone(), initial.weights().clone())?);

        let integrands = |s: &SystemState| -> (Array1<f64>, Array2<f64>) {
            let p = s.phase_values();
            let w = s.weights().weights();
            let trig = Trig::new(p);
            let dp = Pairs::new(&self.model().coupling, p, &trig);
            let hp = Pairs::new(&self.model().plasticity, p, &trig);
            with_pairs!(dp, hp, |d, h| {
                let fw = Array2::from_shape_fn((n, n), |(i, j)| -eps * (w[(i, j)] + h.at(i, j)));
                let fp = Array1::from_shape_fn(n, |i| {
                    omega[i] + (0..n).map(|j| w[(i, j)] * d.at(i, j)).sum::<f64>() / n as f64
                });
                (fp, fw)
            })
        };

        let mut previous = integrands(first);
        for (k, s) in candidate.iter().enumerate().skip(1) {
            let current = integrands(s);
            let half = 0.5 * (s.t() - candidate[k - 1].t());
            phases.zip_mut_with(&(&previous.0 + &current.0), |p, f| *p += half * f);
            weights.zip_mut_with(&(&previous.1 + &current.1), |w, f| *w += half * f);
            let next = SystemState::from_arrays(s.t(), phases.clone(), weights.clone())
                .map_err(|_| Error::BlowUp { t: s.t(), what: "Picard iterate" })?;
            out.push(next);
            previous = current;
        }
        Ok(out)
    }

    /// Time-marching Picard iteration on the RK4 grid of step `dt`.
    ///
    /// Windows hold `⌊t*/dt⌋` steps (at least one) with `M₃ t* = 1/2`. Each
    /// window starts from the constant candidate and iterates until two
    /// successive iterates are closer than `tol` in the time-uniform distance.
    /// A window that has not converged after `max_iter` applications is
    /// halved once; a second failure is reported as
    /// [`Error::NonContraction`].
    pub fn picard_solve(&self, initial: &SystemState, dt: f64, tol: f64, max_iter: usize) -> Result<PicardSolution> {
        if !(tol > 0.0) {
            return Err(invalid("tol", "tolerance must be positive"));
        }
        if max_iter == 0 {
            return Err(invalid("max_iter", "at least one iteration is required"));
        }
        let total = self.step_count(dt)?;
        let model = self.model();
        let m3 = contraction_constant(model, initial.weights().tv_norm());
        let t_star = if m3 > 0.0 { 0.5 / m3 } else { model.horizon() };
        let mut window = ((t_star / dt).floor() as usize).clamp(1, total);
        let time = |k: usize| {
            if k == total {
                model.t_end()
            } else {
                model.t0() + k as f64 * dt
            }
        };

        let mut states = vec![initial.clone()];
        let mut windows = Vec::new();
        let mut k0 = 0;
        while k0 < total {
            let start = states.last().expect("non-empty").clone();
            let mut shrunk = false;
            loop {
                let len = window.min(total - k0);
                let mut candidate: Vec<SystemState> = (0..=len)
                    .map(|k| start.clone().with_time(time(k0 + k)))
                    .collect();
                let mut outcome = None;
                for iteration in 1..=max_iter {
                    let next = self.picard_apply(&candidate, &start)?;
                    let change = candidate
                        .iter()
                        .zip(&next)
                        .map(|(a, b)| state_distance(a, b).total)
                        .fold(0.0, f64::max);
                    candidate = next;
                    if change < tol {
                        outcome = Some((iteration - 1, change));
                        break;
                    }
                }
                match outcome {
                    Some((iterations, final_change)) => {
                        windows.push(PicardWindow {
                            start: start.t(),
                            steps: len,
                            iterations,
                            final_change,
                        });
                        states.extend(candidate.into_iter().skip(1));
                        k0 += len;
                        break;
                    }
                    None if !shrunk && len > 1 => {
                        shrunk = true;
                        window = (len / 2).max(1);
                    }
                    None => {
                        return Err(Error::NonContraction {
                            start: start.t(),
                            window_steps: len,
                            iterations: max_iter,
                            m3,
                            t_star,
                        })
                    }
                }
            }
        }
        Ok(PicardSolution {
            trajectory: Trajectory::new(model.clone(), states)?,
            windows,
            m3,
            t_star,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::system::tests::scattered_state;
    use crate::graphon::Partition;
    use crate::metrics::d_interval_infty;
    use crate::model::{make_berner, CouplingSpec, FrequencySpec};
    use approx::assert_relative_eq;

    fn drift_model() -> ModelSpec {
        ModelSpec::new(
            CouplingSpec::zero(),
            CouplingSpec::sine_lag(1.0, 0.2),
            FrequencySpec::constant(0.9),
            0.0,
            0.5,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn one_application_to_constant_data_gives_the_drift() {
        let sys = DiscreteSystem::new(drift_model(), Partition::new(3).unwrap(), 4);
        let init = scattered_state(3, 0.5);
        let candidate: Vec<_> = (0..=4).map(|k| init.clone().with_time(0.5 + 0.25 * k as f64)).collect();
        let out = sys.picard_apply(&candidate, &init).unwrap();
        assert_eq!(out[0], init);
        for s in &out {
            for (p, p0) in s.phase_values().iter().zip(init.phase_values()) {
                assert_relative_eq!(*p, p0 + 0.9 * (s.t() - 0.5), epsilon = 1e-14);
            }
            assert_eq!(s.weights(), init.weights());
        }
    }

    #[test]
    fn drift_converges_after_one_iteration() {
        let sys = DiscreteSystem::new(drift_model(), Partition::new(3).unwrap(), 4);
        let sol = sys.picard_solve(&scattered_state(3, 0.5), 0.1, 1e-12, 5).unwrap();
        assert!(sol.windows.iter().all(|w| w.iterations == 1));
        assert_eq!(sol.m3, 0.0);
    }

    #[test]
    fn exact_solution_is_nearly_fixed() {
        let model = make_berner(0.3, 0.5, -0.2, 0.4, 0.0, 0.2).unwrap();
        let sys = DiscreteSystem::new(model, Partition::new(4).unwrap(), 4);
        let init = scattered_state(4, 0.0);
        let residual = |dt: f64| {
            let tr = sys.integrate(&init, dt, 1).unwrap();
            let image = sys.picard_apply(tr.states(), &init).unwrap();
            d_interval_infty(tr.states(), &image).unwrap()
        };
        let (coarse, fine) = (residual(0.02), residual(0.01));
        assert!(coarse < 1e-3);
        assert!(coarse / fine > 3.5, "{coarse} {fine}");
    }

    #[test]
    fn agrees_with_rk4_on_the_adaptive_model() {
        let model = make_berner(0.0, 0.4, -0.3, 0.5, 0.0, 0.5).unwrap();
        let sys = DiscreteSystem::new(model, Partition::new(8).unwrap(), 4);
        let init = scattered_state(8, 0.0);
        let tol = 1e-11;
        let sol = sys.picard_solve(&init, 1e-3, tol, 200).unwrap();
        let rk = sys.integrate(&init, 1e-3, 1).unwrap();
        assert!(d_interval_infty(sol.trajectory.states(), rk.states()).unwrap() < 1e-5);
        let bound = (tol.ln() / 0.5f64.ln()).ceil() as usize + 1;
        assert!(sol.windows.iter().all(|w| w.iterations <= bound));
        assert_relative_eq!(sol.t_star * sol.m3, 0.5);
    }

    #[test]
    fn reports_non_contraction() {
        let model = make_berner(0.0, 0.4, -0.3, 0.5, 0.0, 0.5).unwrap();
        let sys = DiscreteSystem::new(model, Partition::new(4).unwrap(), 4);
        let err = sys.picard_solve(&scattered_state(4, 0.0), 0.25, 1e-14, 2).unwrap_err();
        assert!(matches!(err, Error::NonContraction { .. }));
    }
}
