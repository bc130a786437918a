use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::pairs::{with_pairs, PairEval, Pairs, Trig};
use super::state::{SystemState, Trajectory};
use crate::error::{invalid, Error, Result};
use crate::graphon::{discretize_frequencies, Partition};
use crate::model::ModelSpec;

/// Rows per rayon task are only worth splitting beyond this size.
const PARALLEL_ROWS: usize = 64;

/// The `n`-oscillator system for one model: per-cell frequencies `ω_i` and
/// the pair functions `D`, `H`.
#[derive(Debug, Clone)]
pub struct DiscreteSystem {
    model: ModelSpec,
    partition: Partition,
    omega: Vec<f64>,
}

#[derive(Clone, Copy)]
enum Stage {
    First,
    Middle,
    Last,
}

struct Workspace {
    kw: Vec<f64>,
    acc: Vec<f64>,
    kphi: [Vec<f64>; 4],
    stage_phases: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            kw: vec![0.0; n * n],
            acc: vec![0.0; n * n],
            kphi: std::array::from_fn(|_| vec![0.0; n]),
            stage_phases: vec![0.0; n],
        }
    }
}

impl DiscreteSystem {
    /// Cell-averaged frequencies with `quadrature` subsamples per cell.
    pub fn new(model: ModelSpec, partition: Partition, quadrature: usize) -> Self {
        let omega = discretize_frequencies(&model.omega, partition, quadrature);
        Self {
            model,
            partition,
            omega,
        }
    }

    pub fn with_frequencies(model: ModelSpec, omega: Vec<f64>) -> Result<Self> {
        let partition = Partition::new(omega.len())?;
        if omega.iter().any(|w| !w.is_finite()) {
            return Err(invalid("omega", "frequencies must be finite"));
        }
        Ok(Self {
            model,
            partition,
            omega,
        })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.omega
    }

    fn check_dims(&self, state: &SystemState) -> Result<()> {
        if state.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: state.n(),
            });
        }
        Ok(())
    }

    /// Time derivatives `(dφ, dW)` at `state`.
    pub fn rhs(&self, state: &SystemState) -> Result<(Array1<f64>, Array2<f64>)> {
        self.check_dims(state)?;
        let n = self.n();
        let eps = self.model.epsilon();
        let phases = state.phase_values();
        let trig = Trig::new(phases);
        let dp = Pairs::new(&self.model.coupling, phases, &trig);
        let hp = Pairs::new(&self.model.plasticity, phases, &trig);
        let w = state.weights().weights();
        let mut dphi = Array1::zeros(n);
        let mut dw = Array2::zeros((n, n));
        with_pairs!(dp, hp, |d, h| {
            for i in 0..n {
                let mut sum = 0.0;
                for j in 0..n {
                    sum += w[(i, j)] * d.at(i, j);
                    dw[(i, j)] = -eps * (w[(i, j)] + h.at(i, j));
                }
                dphi[i] = self.omega[i] + sum / n as f64;
            }
        });
        Ok((dphi, dw))
    }

    /// Number of steps of size `dt` covering the horizon.
    pub fn step_count(&self, dt: f64) -> Result<usize> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(invalid("dt", "time step must be positive and finite"));
        }
        let horizon = self.model.horizon();
        let steps = (horizon / dt).round();
        if steps < 1.0 || (steps * dt - horizon).abs() > 1e-9 * horizon.max(1.0) {
            return Err(invalid(
                "dt",
                format!("time step {dt} does not divide the horizon {horizon}"),
            ));
        }
        Ok(steps as usize)
    }

    /// Classical RK4 with fixed step `dt`, keeping every `stride`-th state and
    /// the final one.
    pub fn integrate(&self, initial: &SystemState, dt: f64, stride: usize) -> Result<Trajectory> {
        let mut states = Vec::new();
        self.integrate_with(initial, dt, stride, |s| {
            states.push(s.clone());
            Ok(())
        })?;
        Trajectory::new(self.model.clone(), states)
    }

    /// Like [`integrate`](Self::integrate), handing each snapshot to
    /// `observer` instead of storing it. Returns the final state.
    pub fn integrate_with<F>(
        &self,
        initial: &SystemState,
        dt: f64,
        stride: usize,
        mut observer: F,
    ) -> Result<SystemState>
    where
        F: FnMut(&SystemState) -> Result<()>,
    {
        self.check_dims(initial)?;
        if stride == 0 {
            return Err(invalid("stride", "snapshot stride must be at least 1"));
        }
        let t0 = self.model.t0();
        if (initial.t() - t0).abs() > 1e-12 * t0.abs().max(1.0) {
            return Err(invalid(
                "initial",
                format!("initial state at t = {} but the model starts at {t0}", initial.t()),
            ));
        }
        let steps = self.step_count(dt)?;
        let mut state = initial.clone().with_time(t0);
        let mut ws = Workspace::new(self.n());
        observer(&state)?;
        for k in 1..=steps {
            let t = if k == steps {
                self.model.t_end()
            } else {
                t0 + k as f64 * dt
            };
            self.step(&mut state, dt, &mut ws);
            state.set_time(t);
            if state.phase_values().iter().any(|p| !p.is_finite()) {
                return Err(Error::BlowUp { t, what: "phases" });
            }
            if k % stride == 0 || k == steps {
                if state.weights().weights().iter().any(|w| !w.is_finite()) {
                    return Err(Error::BlowUp { t, what: "weights" });
                }
                observer(&state)?;
            }
        }
        Ok(state)
    }

    fn step(&self, state: &mut SystemState, dt: f64, ws: &mut Workspace) {
        const NODES: [f64; 4] = [0.0, 0.5, 0.5, 1.0];
        let n = self.n();
        let (phases, weights) = state.parts_mut();
        let phi0 = phases.as_slice().expect("contiguous");
        let w = weights.as_slice_mut();
        for s in 0..4 {
            let (prev, cur) = ws.kphi.split_at_mut(s);
            let c = NODES[s] * dt;
            match prev.last() {
                None => ws.stage_phases.copy_from_slice(phi0),
                Some(k) => {
                    for i in 0..n {
                        ws.stage_phases[i] = phi0[i] + c * k[i];
                    }
                }
            }
            let stage = match s {
                0 => Stage::First,
                3 => Stage::Last,
                _ => Stage::Middle,
            };
            self.stage(stage, c, dt, &ws.stage_phases, w, &mut ws.kw, &mut ws.acc, &mut cur[0]);
        }
        let [k1, k2, k3, k4] = &ws.kphi;
        let sixth = dt / 6.0;
        for (i, p) in phases.iter_mut().enumerate() {
            *p += sixth * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }

    /// One RK4 stage in a single pass over the weight matrix. `coef` is the
    /// multiple of the previous weight slope added to `W` to form the stage
    /// weights; the last stage also writes the updated `W` in place.
    #[allow(clippy::too_many_arguments)]
    fn stage(
        &self,
        stage: Stage,
        coef: f64,
        dt: f64,
        phases: &[f64],
        w: &mut [f64],
        kw: &mut [f64],
        acc: &mut [f64],
        kphi: &mut [f64],
    ) {
        let n = self.n();
        let eps = self.model.epsilon();
        let trig = Trig::new(phases);
        let dp = Pairs::new(&self.model.coupling, phases, &trig);
        let hp = Pairs::new(&self.model.plasticity, phases, &trig);
        let omega = &self.omega;
        let sixth = dt / 6.0;
        with_pairs!(dp, hp, |d, h| {
            let row = |scratch: &mut (Vec<f64>, Vec<f64>),
                       (i, (((wr, kr), ar), out)): (usize, (((&mut [f64], &mut [f64]), &mut [f64]), &mut f64))| {
                let (drow, hrow) = scratch;
                d.fill_row(i, drow);
                h.fill_row(i, hrow);
                *out = omega[i] + stage_row(stage, coef, sixth, eps, wr, kr, ar, drow, hrow) / n as f64;
            };
            let scratch = || (vec![0.0; n], vec![0.0; n]);
            if n >= PARALLEL_ROWS {
                w.par_chunks_mut(n)
                    .zip(kw.par_chunks_mut(n))
                    .zip(acc.par_chunks_mut(n))
                    .zip(kphi.par_iter_mut())
                    .enumerate()
                    .for_each_init(scratch, row);
            } else {
                let mut buffers = scratch();
                w.chunks_mut(n)
                    .zip(kw.chunks_mut(n))
                    .zip(acc.chunks_mut(n))
                    .zip(kphi.iter_mut())
                    .enumerate()
                    .for_each(|item| row(&mut buffers, item));
            }
        });
    }
}

/// Returns `Σ_j W^s_ij D_ij` for the stage weights `W^s` of one row and
/// updates its slope buffers. `d` is overwritten.
#[allow(clippy::too_many_arguments)]
#[inline(always)]
fn stage_row(
    stage: Stage,
    coef: f64,
    sixth: f64,
    eps: f64,
    w: &mut [f64],
    kw: &mut [f64],
    acc: &mut [f64],
    d: &mut [f64],
    h: &[f64],
) -> f64 {
    let n = w.len();
    let (kw, acc, d, h) = (&mut kw[..n], &mut acc[..n], &mut d[..n], &h[..n]);
    match stage {
        Stage::First => {
            for j in 0..n {
                let ws = w[j];
                let k = -eps * (ws + h[j]);
                kw[j] = k;
                acc[j] = k;
                d[j] *= ws;
            }
        }
        Stage::Middle => {
            for j in 0..n {
                let ws = w[j] + coef * kw[j];
                let k = -eps * (ws + h[j]);
                kw[j] = k;
                acc[j] += 2.0 * k;
                d[j] *= ws;
            }
        }
        Stage::Last => {
            for j in 0..n {
                let ws = w[j] + coef * kw[j];
                let k = -eps * (ws + h[j]);
                w[j] += sixth * (acc[j] + k);
                d[j] *= ws;
            }
        }
    }
    lane_sum(d)
}

/// Sum with four interleaved partial sums, which lets the loop vectorize.
#[inline(always)]
fn lane_sum(v: &[f64]) -> f64 {
    let mut lanes = [0.0; 4];
    let chunks = v.chunks_exact(4);
    let rest = chunks.remainder();
    for c in chunks {
        for l in 0..4 {
            lanes[l] += c[l];
        }
    }
    rest.iter().fold((lanes[0] + lanes[1]) + (lanes[2] + lanes[3]), |s, x| s + x)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{make_berner, CouplingSpec, FrequencySpec, PeriodicTable};
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_2;

    /// Textbook RK4 on the concatenated vector, built on `rhs`.
    pub(crate) fn naive_rk4(sys: &DiscreteSystem, initial: &SystemState, dt: f64) -> SystemState {
        let steps = sys.step_count(dt).unwrap();
        let mut s = initial.clone();
        for k in 1..=steps {
            let add = |s: &SystemState, c: f64, k: &(Array1<f64>, Array2<f64>)| {
                SystemState::from_arrays(
                    s.t(),
                    s.phases().values() + &(&k.0 * c),
                    s.weights().weights() + &(&k.1 * c),
                )
                .unwrap()
            };
            let k1 = sys.rhs(&s).unwrap();
            let k2 = sys.rhs(&add(&s, dt / 2.0, &k1)).unwrap();
            let k3 = sys.rhs(&add(&s, dt / 2.0, &k2)).unwrap();
            let k4 = sys.rhs(&add(&s, dt, &k3)).unwrap();
            let phi = s.phases().values() + &((&k1.0 + &(&k2.0 * 2.0) + &(&k3.0 * 2.0) + &k4.0) * (dt / 6.0));
            let w = s.weights().weights() + &((&k1.1 + &(&k2.1 * 2.0) + &(&k3.1 * 2.0) + &k4.1) * (dt / 6.0));
            s = SystemState::from_arrays(initial.t() + k as f64 * dt, phi, w).unwrap();
        }
        s
    }

    fn berner_system(n: usize, eps: f64, horizon: f64) -> DiscreteSystem {
        DiscreteSystem::new(make_berner(0.0, 0.3, -0.7, eps, 0.0, horizon).unwrap(), Partition::new(n).unwrap(), 4)
    }

    pub(crate) fn scattered_state(n: usize, t: f64) -> SystemState {
        SystemState::from_arrays(
            t,
            Array1::from_shape_fn(n, |i| (i as f64 * 1.3).sin() * 2.0 + 0.1 * i as f64),
            Array2::from_shape_fn((n, n), |(i, j)| 0.5 + 0.4 * ((i * 3 + j * 7) as f64).cos()),
        )
        .unwrap()
    }

    #[test]
    fn rhs_on_the_synchronized_manifold() {
        let a = 0.8;
        let model = ModelSpec::new(
            CouplingSpec::sine_lag(1.0, a),
            CouplingSpec::sine_lag(1.0, 0.2),
            FrequencySpec::constant(1.5),
            0.1,
            0.0,
            1.0,
        )
        .unwrap();
        let sys = DiscreteSystem::new(model, Partition::new(5).unwrap(), 4);
        let (dphi, _) = sys.rhs(&SystemState::uniform(0.0, 5, 2.0, 0.7).unwrap()).unwrap();
        for v in dphi.iter() {
            assert_relative_eq!(*v, 1.5 + 0.7 * a.sin(), epsilon = 1e-15);
        }
    }

    #[test]
    fn rhs_two_oscillators() {
        let sys = DiscreteSystem::new(make_berner(0.0, 0.0, 0.0, 0.0, 0.0, 1.0).unwrap(), Partition::new(2).unwrap(), 4);
        let s = SystemState::from_arrays(0.0, ndarray::array![0.0, FRAC_PI_2], Array2::ones((2, 2))).unwrap();
        let (dphi, dw) = sys.rhs(&s).unwrap();
        assert_relative_eq!(dphi[0], -0.5, epsilon = 1e-15);
        assert_relative_eq!(dphi[1], 0.5, epsilon = 1e-15);
        assert!(dw.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn free_drift_is_exact() {
        let model = ModelSpec::new(
            CouplingSpec::zero(),
            CouplingSpec::sine_lag(1.0, 0.4),
            FrequencySpec::constant(0.75),
            0.0,
            1.0,
            2.0,
        )
        .unwrap();
        let sys = DiscreteSystem::new(model, Partition::new(4).unwrap(), 4);
        let init = scattered_state(4, 1.0);
        let tr = sys.integrate(&init, 0.25, 1).unwrap();
        for s in tr.states() {
            for (p, p0) in s.phase_values().iter().zip(init.phase_values()) {
                assert_relative_eq!(*p, p0 + 0.75 * (s.t() - 1.0), epsilon = 1e-14);
            }
            assert_eq!(s.weights(), init.weights());
        }
    }

    #[test]
    fn snapshots_follow_the_stride_and_end_at_the_horizon() {
        let sys = berner_system(3, 0.1, 1.0);
        let tr = sys.integrate(&scattered_state(3, 0.0), 0.1, 3).unwrap();
        let times = tr.times();
        assert_eq!(times.len(), 5);
        assert_relative_eq!(times[1], 0.3, epsilon = 1e-15);
        assert_eq!(*times.last().unwrap(), 1.0);
        assert!(sys.integrate(&scattered_state(3, 0.0), 0.3, 1).is_err());
        assert!(sys.integrate(&scattered_state(3, 0.0), 0.1, 0).is_err());
        assert!(sys.integrate(&scattered_state(3, 0.5), 0.1, 1).is_err());
        assert!(sys.integrate(&scattered_state(4, 0.0), 0.1, 1).is_err());
    }

    #[test]
    fn fused_stepper_matches_textbook_rk4() {
        for n in [1, 3, 7, 70] {
            let sys = berner_system(n, 0.3, 0.5);
            let init = scattered_state(n, 0.0);
            let fused = sys.integrate(&init, 0.05, 10).unwrap();
            let naive = naive_rk4(&sys, &init, 0.05);
            let last = fused.last();
            for (a, b) in last.phase_values().iter().zip(naive.phase_values()) {
                assert_relative_eq!(*a, *b, epsilon = 1e-12);
            }
            for (a, b) in last.weights().weights().iter().zip(naive.weights().weights().iter()) {
                assert_relative_eq!(*a, *b, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn tabulated_couplings_follow_the_same_stepper() {
        let d = PeriodicTable::from_fn(32, |u, v| (u - v + 0.3).sin()).unwrap();
        let h = PeriodicTable::from_fn(32, |u, v| 0.5 * (u - v).cos()).unwrap();
        let model = ModelSpec::new(
            CouplingSpec::tabulated(d),
            CouplingSpec::tabulated(h),
            FrequencySpec::affine(0.0, 1.0),
            0.2,
            0.0,
            0.4,
        )
        .unwrap();
        let sys = DiscreteSystem::new(model, Partition::new(5).unwrap(), 4);
        let init = scattered_state(5, 0.0);
        let fused = sys.integrate(&init, 0.02, 100).unwrap();
        let naive = naive_rk4(&sys, &init, 0.02);
        for (a, b) in fused.last().phase_values().iter().zip(naive.phase_values()) {
            assert_relative_eq!(*a, *b, epsilon = 1e-12);
        }
    }

    #[test]
    fn static_network_keeps_its_weights() {
        let sys = berner_system(6, 0.0, 1.0);
        let init = scattered_state(6, 0.0);
        let tr = sys.integrate(&init, 0.1, 2).unwrap();
        for s in tr.states() {
            assert_eq!(s.weights(), init.weights());
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let sys = berner_system(4, 0.5, 1.0);
        let init = scattered_state(4, 0.0);
        let reference = sys.integrate(&init, 1.0 / 512.0, 512).unwrap();
        let err = |dt: f64| {
            let tr = sys.integrate(&init, dt, 1_000_000).unwrap();
            crate::metrics::state_distance(tr.last(), reference.last()).total
        };
        let ratio = err(0.1) / err(0.05);
        assert!(ratio > 12.0, "ratio {ratio}");
    }
}
