//! Graphon data on the vertex space `X = [0, 1]` with Lebesgue measure.
//!
//! A [`StepGraphon`] is the density of a measure family `η^x` that is constant
//! on the rectangles of a uniform [`Partition`]; a [`PhaseField`] is the
//! matching step function for phases. Both are exactly the lifts of a finite
//! `n`-node state, so no separate "lift" object is needed: an `n`-vector of
//! phases and an `n x n` weight matrix *are* their lifts once paired with the
//! partition.

mod assumptions;
mod discretize;
mod io;
mod kernel;

pub use assumptions::{
    berner_horizon_bound, check_assumptions, positivity_threshold, AssumptionCheck,
    AssumptionReport, Horizon, DEFAULT_SAMPLE_DENSITY,
};
pub use discretize::{
    discretize_frequencies, discretize_phases, discretize_weights_average,
    discretize_weights_sample, DEFAULT_QUADRATURE,
};
pub use kernel::{Kernel, KernelFamily, PhaseProfile};

use ndarray::{Array1, Array2};

use crate::error::{invalid, Error, Result};

/// Uniform partition of `[0, 1]` into cells `[(i-1)/n, i/n)`, the last cell
/// closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
}

impl Partition {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(invalid("n", "partition needs at least one cell"));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Measure of every cell.
    pub fn cell_measure(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn cell_bounds(&self, i: usize) -> (f64, f64) {
        let n = self.n as f64;
        (i as f64 / n, (i + 1) as f64 / n)
    }

    pub fn midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n as f64
    }

    /// Index of the cell containing `x`.
    pub fn cell_of(&self, x: f64) -> Result<usize> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        Ok(((x * self.n as f64).floor() as usize).min(self.n - 1))
    }
}

/// Step function `x -> φ_i` for `x` in cell `i`; values are real lifts.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    partition: Partition,
    values: Array1<f64>,
}

impl PhaseField {
    pub fn new(partition: Partition, values: Array1<f64>) -> Result<Self> {
        if values.len() != partition.n() {
            return Err(Error::DimensionMismatch {
                expected: partition.n(),
                found: values.len(),
            });
        }
        Ok(Self { partition, values })
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut Array1<f64> {
        &mut self.values
    }

    pub fn into_values(self) -> Array1<f64> {
        self.values
    }

    /// Value of the step function at `x`.
    pub fn eval_at(&self, x: f64) -> Result<f64> {
        Ok(self.values[self.partition.cell_of(x)?])
    }
}

/// Builds the step-function lift of `n` cell values.
pub fn lift_phases(values: &[f64], partition: Partition) -> Result<PhaseField> {
    PhaseField::new(partition, Array1::from(values.to_vec()))
}

/// Step-function density `W^N(x, y)` of the measure family
/// `dη^x(y) = W^N(x, y) dy`. Row `i` is the fiber density for `x` in cell `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepGraphon {
    partition: Partition,
    weights: Array2<f64>,
}

impl StepGraphon {
    pub fn new(partition: Partition, weights: Array2<f64>) -> Result<Self> {
        let n = partition.n();
        if weights.dim() != (n, n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if weights.nrows() != n {
                    weights.nrows()
                } else {
                    weights.ncols()
                },
            });
        }
        // Hot loops index the raw buffer row-major.
        let weights = if weights.is_standard_layout() {
            weights
        } else {
            weights.as_standard_layout().into_owned()
        };
        Ok(Self { partition, weights })
    }

    pub fn constant(partition: Partition, value: f64) -> Self {
        let n = partition.n();
        Self {
            partition,
            weights: Array2::from_elem((n, n), value),
        }
    }

    pub fn partition(&self) -> Partition {
        self.partition
    }

    pub fn n(&self) -> usize {
        self.partition.n()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub(crate) fn as_slice(&self) -> &[f64] {
        self.weights.as_slice().expect("standard layout")
    }

    pub(crate) fn as_slice_mut(&mut self) -> &mut [f64] {
        self.weights.as_slice_mut().expect("standard layout")
    }

    /// Total mass `η^x(X) = (1/n) Σ_j W_ij` of the fiber over cell `i`.
    pub fn fiber_mass(&self, i: usize) -> f64 {
        self.weights.row(i).sum() / self.n() as f64
    }

    /// `‖η‖* = sup_x ‖η^x‖_TV = max_i (1/n) Σ_j |W_ij|`.
    pub fn tv_norm(&self) -> f64 {
        let n = self.n() as f64;
        self.weights
            .rows()
            .into_iter()
            .map(|r| r.iter().map(|w| w.abs()).sum::<f64>() / n)
            .fold(0.0, f64::max)
    }

    pub fn min_entry(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.weights.iter().fold(0.0, |acc, w| acc.max(w.abs()))
    }

    pub fn eval_at(&self, x: f64, y: f64) -> Result<f64> {
        Ok(self.weights[[self.partition.cell_of(x)?, self.partition.cell_of(y)?]])
    }
}

/// Re-expresses `g` on the uniform partition with `m` cells (`m` a multiple of
/// `g.n()`) by block replication. The represented measure family is unchanged.
pub fn refine(g: &StepGraphon, m: usize) -> Result<StepGraphon> {
    let n = g.n();
    if m == 0 || m % n != 0 {
        return Err(Error::NotMultiple { n, target: m });
    }
    let k = m / n;
    let weights = Array2::from_shape_fn((m, m), |(a, b)| g.weights[[a / k, b / k]]);
    StepGraphon::new(Partition::new(m)?, weights)
}

/// Block replication of a phase field onto `m` cells.
pub fn refine_phases(f: &PhaseField, m: usize) -> Result<PhaseField> {
    let n = f.partition.n();
    if m == 0 || m % n != 0 {
        return Err(Error::NotMultiple { n, target: m });
    }
    let k = m / n;
    PhaseField::new(
        Partition::new(m)?,
        Array1::from_shape_fn(m, |a| f.values[a / k]),
    )
}

pub use io::{read_step_graphon, read_step_graphon_csv, write_step_graphon, write_step_graphon_csv};
