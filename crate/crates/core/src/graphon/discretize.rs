//! Discretization of continuum data onto a uniform partition: cell averages
//! of frequencies, weights and initial phases, and midpoint sampling of the
//! weights.
//!
//! Cell averages use the composite midpoint rule with `m` subsamples per
//! cell axis, which is exact for (bi)linear integrands.

use ndarray::{Array1, Array2};
use rayon::prelude::*;

use super::{Kernel, KernelFamily, Partition, PhaseField, StepGraphon};
use crate::model::{FrequencyFamily, FrequencySpec};

/// Midpoint subsamples per cell axis.
pub const DEFAULT_QUADRATURE: usize = 4;

fn subsample_points(p: Partition, i: usize, m: usize) -> impl Iterator<Item = f64> {
    let n = p.n() as f64;
    let m_f = m as f64;
    (0..m).map(move |a| (i as f64 + (a as f64 + 0.5) / m_f) / n)
}

fn cell_mean(p: Partition, i: usize, m: usize, f: impl Fn(f64) -> f64) -> f64 {
    let m = m.max(1);
    subsample_points(p, i, m).map(f).sum::<f64>() / m as f64
}

/// `ω_i = n ∫_{X_i} ω(y) dy` for every cell.
pub fn discretize_frequencies(omega: &FrequencySpec, p: Partition, m: usize) -> Vec<f64> {
    (0..p.n())
        .map(|i| match omega.family() {
            FrequencyFamily::Constant(c) => *c,
            FrequencyFamily::Affine { intercept, slope } => intercept + slope * p.midpoint(i),
            FrequencyFamily::Tabulated(_) => cell_mean(p, i, m, |y| omega.eval(y)),
        })
        .collect()
}

/// `W_ij = n² ∬_{X_i × X_j} W(x, y) dx dy`.
pub fn discretize_weights_average(k: &Kernel, p: Partition, m: usize) -> StepGraphon {
    if let KernelFamily::Constant(c) = k.family() {
        return StepGraphon::constant(p, *c);
    }
    let n = p.n();
    let m = m.max(1);
    let pts: Vec<Vec<f64>> = (0..n).map(|i| subsample_points(p, i, m).collect()).collect();
    let denom = (m * m) as f64;
    let mut w = vec![0.0; n * n];
    w.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, out) in row.iter_mut().enumerate() {
            let mut s = 0.0;
            for &x in &pts[i] {
                for &y in &pts[j] {
                    s += k.eval(x, y);
                }
            }
            *out = s / denom;
        }
    });
    StepGraphon::new(p, Array2::from_shape_vec((n, n), w).expect("n*n buffer"))
        .expect("shape matches partition")
}

/// `W_ij = W(x_i, y_j)` at the midpoint pair of each rectangle.
pub fn discretize_weights_sample(k: &Kernel, p: Partition) -> StepGraphon {
    let n = p.n();
    let w = Array2::from_shape_fn((n, n), |(i, j)| k.eval(p.midpoint(i), p.midpoint(j)));
    StepGraphon::new(p, w).expect("shape matches partition")
}

/// `φ_i = n ∫_{X_i} φ0(y) dy` for a continuous real lift `φ0`.
pub fn discretize_phases(phi0: impl Fn(f64) -> f64, p: Partition, m: usize) -> PhaseField {
    let values = Array1::from_iter((0..p.n()).map(|i| cell_mean(p, i, m, &phi0)));
    PhaseField::new(p, values).expect("length matches partition")
}
