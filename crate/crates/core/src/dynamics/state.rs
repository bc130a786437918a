use ndarray::{Array1, Array2};

use crate::error::{invalid, Error, Result};
use crate::graphon::{Partition, PhaseField, StepGraphon};
use crate::model::ModelSpec;

/// Phases `φ_i` (real lifts) and weights `W_ij` at time `t`. The pair is at
/// the same time its own step-function lift.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    t: f64,
    phases: PhaseField,
    weights: StepGraphon,
}

impl SystemState {
    pub fn new(t: f64, phases: PhaseField, weights: StepGraphon) -> Result<Self> {
        if phases.partition() != weights.partition() {
            return Err(Error::DimensionMismatch {
                expected: phases.partition().n(),
                found: weights.n(),
            });
        }
        if !t.is_finite() {
            return Err(invalid("t", "time must be finite"));
        }
        let state = Self { t, phases, weights };
        if !state.is_finite() {
            return Err(invalid("state", "phases and weights must be finite"));
        }
        Ok(state)
    }

    pub fn from_arrays(t: f64, phases: Array1<f64>, weights: Array2<f64>) -> Result<Self> {
        let p = Partition::new(phases.len())?;
        Self::new(t, PhaseField::new(p, phases)?, StepGraphon::new(p, weights)?)
    }

    /// All phases equal to `phi`, all weights equal to `w`.
    pub fn uniform(t: f64, n: usize, phi: f64, w: f64) -> Result<Self> {
        let p = Partition::new(n)?;
        Self::new(
            t,
            PhaseField::new(p, Array1::from_elem(n, phi))?,
            StepGraphon::constant(p, w),
        )
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n(&self) -> usize {
        self.weights.n()
    }

    pub fn partition(&self) -> Partition {
        self.weights.partition()
    }

    pub fn phases(&self) -> &PhaseField {
        &self.phases
    }

    pub fn weights(&self) -> &StepGraphon {
        &self.weights
    }

    pub fn phase_values(&self) -> &[f64] {
        self.phases.values().as_slice().expect("contiguous")
    }

    pub fn is_finite(&self) -> bool {
        self.phases.values().iter().all(|v| v.is_finite())
            && self.weights.weights().iter().all(|v| v.is_finite())
    }

    pub(crate) fn set_time(&mut self, t: f64) {
        self.t = t;
    }

    pub(crate) fn parts_mut(&mut self) -> (&mut Array1<f64>, &mut StepGraphon) {
        (self.phases.values_mut(), &mut self.weights)
    }

    pub(crate) fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }
}

/// Snapshots of one solution on `[t0, t0 + T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    model: ModelSpec,
    states: Vec<SystemState>,
}

impl Trajectory {
    /// Requires a non-empty sequence with strictly increasing times, a common
    /// partition size and the first snapshot at the model's `t0`.
    pub fn new(model: ModelSpec, states: Vec<SystemState>) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| invalid("states", "a trajectory needs at least one snapshot"))?;
        if (first.t() - model.t0()).abs() > 1e-12 * model.t0().abs().max(1.0) {
            return Err(invalid(
                "states",
                format!("first snapshot at t = {} but the model starts at {}", first.t(), model.t0()),
            ));
        }
        let n = first.n();
        for (k, pair) in states.windows(2).enumerate() {
            if pair[1].n() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: pair[1].n(),
                });
            }
            if !(pair[1].t() > pair[0].t()) {
                return Err(invalid(
                    "states",
                    format!("snapshot times not increasing at index {}", k + 1),
                ));
            }
        }
        Ok(Self { model, states })
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn n(&self) -> usize {
        self.states[0].n()
    }

    pub fn states(&self) -> &[SystemState] {
        &self.states
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(SystemState::t).collect()
    }

    pub fn initial(&self) -> &SystemState {
        &self.states[0]
    }

    pub fn last(&self) -> &SystemState {
        self.states.last().expect("non-empty")
    }

    pub fn into_states(self) -> Vec<SystemState> {
        self.states
    }
}
