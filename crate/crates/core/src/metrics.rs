//! Distances between lifted states.
//!
//! All fields are step functions on uniform partitions, so the essential
//! suprema over `x` are maxima over overlapping cells and the total variation
//! of a fiber difference is an exact finite sum. Two partitions of sizes
//! `n1`, `n2` are compared on their common refinement without materializing
//! it: cell overlaps are computed in integer units of `1 / (n1 n2)`.

use serde::Serialize;

use crate::dynamics::SystemState;
use crate::error::{Error, Result};
use crate::graphon::{PhaseField, StepGraphon};
use crate::model::{torus_distance, TorusAngle};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct DistanceBreakdown {
    #[serde(rename = "phase")]
    pub phase_part: f64,
    #[serde(rename = "weight")]
    pub weight_part: f64,
    pub total: f64,
}

impl DistanceBreakdown {
    pub fn new(phase_part: f64, weight_part: f64) -> Self {
        Self {
            phase_part,
            weight_part,
            total: phase_part + weight_part,
        }
    }
}

/// Walks the overlapping cell pairs `(i, j)` of two uniform partitions in
/// increasing order, yielding each pair with its overlap length in units of
/// `1 / (n1 n2)`.
fn overlaps(n1: usize, n2: usize) -> impl Iterator<Item = (usize, usize, u64)> {
    let (a, b) = (n1 as u64, n2 as u64);
    let mut i = 0usize;
    let mut j = 0usize;
    let mut pos = 0u64;
    std::iter::from_fn(move || {
        if i >= n1 || j >= n2 {
            return None;
        }
        let end_i = (i as u64 + 1) * b;
        let end_j = (j as u64 + 1) * a;
        let end = end_i.min(end_j);
        let item = (i, j, end - pos);
        pos = end;
        if end_i == end {
            i += 1;
        }
        if end_j == end {
            j += 1;
        }
        Some(item)
    })
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn sup_torus(f: &[f64], g: &[f64]) -> f64 {
    overlaps(f.len(), g.len()).fold(0.0, |acc, (i, j, _)| acc.max(torus_distance(f[i], g[j])))
}

/// `esssup_x d_T(f(x), g(x))`.
pub fn phase_sup_distance(f: &PhaseField, g: &PhaseField) -> f64 {
    sup_torus(
        f.values().as_slice().expect("contiguous"),
        g.values().as_slice().expect("contiguous"),
    )
}

/// `∫ |r1(y) - r2(y)| dy` for step rows of lengths `n1`, `n2`.
///
/// Maximal runs of equal integrand are merged and their lengths taken as
/// reduced fractions before summing, so the result depends only on the step
/// functions themselves and not on how finely they are represented.
fn row_l1(r1: &[f64], r2: &[f64]) -> f64 {
    let denom = (r1.len() * r2.len()) as u64;
    let len = |count: u64| {
        let g = gcd(count, denom);
        (count / g) as f64 / (denom / g) as f64
    };
    let mut sum = 0.0;
    let mut run: Option<(f64, u64)> = None;
    for (i, j, count) in overlaps(r1.len(), r2.len()) {
        let v = (r1[i] - r2[j]).abs();
        run = match run {
            Some((rv, rc)) if rv.to_bits() == v.to_bits() => Some((rv, rc + count)),
            Some((rv, rc)) => {
                sum += rv * len(rc);
                Some((v, count))
            }
            None => Some((v, count)),
        };
    }
    if let Some((rv, rc)) = run {
        sum += rv * len(rc);
    }
    sum
}

fn sup_tv(g1: &StepGraphon, g2: &StepGraphon) -> f64 {
    let (n1, n2) = (g1.n(), g2.n());
    let (w1, w2) = (g1.as_slice(), g2.as_slice());
    let mut best: f64 = 0.0;
    let mut last: Option<(usize, usize)> = None;
    for (i, j, _) in overlaps(n1, n2) {
        if last == Some((i, j)) {
            continue;
        }
        last = Some((i, j));
        best = best.max(row_l1(&w1[i * n1..(i + 1) * n1], &w2[j * n2..(j + 1) * n2]));
    }
    best
}

/// `‖η1 - η2‖* = sup_x ‖η1^x - η2^x‖_TV` for step-graphon densities.
pub fn tv_step_distance(g1: &StepGraphon, g2: &StepGraphon) -> f64 {
    sup_tv(g1, g2)
}

/// `d_∞ = d_{T,∞}(φ, ψ) + ‖η - ξ‖*`.
pub fn d_infty(a: (&PhaseField, &StepGraphon), b: (&PhaseField, &StepGraphon)) -> DistanceBreakdown {
    DistanceBreakdown::new(phase_sup_distance(a.0, b.0), tv_step_distance(a.1, b.1))
}

/// `d_∞` between two lifted states.
pub fn state_distance(a: &SystemState, b: &SystemState) -> DistanceBreakdown {
    d_infty((a.phases(), a.weights()), (b.phases(), b.weights()))
}

fn times_match(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

/// Per-snapshot `d_∞` between two sequences sampled at the same times.
pub fn distance_profile(a: &[SystemState], b: &[SystemState]) -> Result<Vec<(f64, DistanceBreakdown)>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    a.iter()
        .zip(b)
        .enumerate()
        .map(|(index, (sa, sb))| {
            if !times_match(sa.t(), sb.t()) {
                return Err(Error::TimeMismatch {
                    index,
                    left: sa.t(),
                    right: sb.t(),
                });
            }
            Ok((sa.t(), state_distance(sa, sb)))
        })
        .collect()
}

/// `d_{T,∞} = sup_t d_∞`, the supremum taken over the stored snapshots.
pub fn d_interval_infty(a: &[SystemState], b: &[SystemState]) -> Result<f64> {
    Ok(distance_profile(a, b)?
        .into_iter()
        .fold(0.0, |acc, (_, d)| acc.max(d.total)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderParameter {
    pub r: f64,
    pub psi: f64,
}

/// `r e^{iψ} = (1/n) Σ_j e^{iφ_j}`, with `ψ` in `[0, 2π)`.
pub fn order_parameter(phases: &[f64]) -> OrderParameter {
    let n = phases.len().max(1) as f64;
    let (s, c) = phases
        .iter()
        .fold((0.0, 0.0), |(s, c), p| (s + p.sin(), c + p.cos()));
    let (s, c) = (s / n, c / n);
    OrderParameter {
        r: s.hypot(c).min(1.0),
        psi: TorusAngle(s.atan2(c)).wrapped(),
    }
}
