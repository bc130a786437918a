//! Evaluation of `D(φ_i, φ_j)` / `H(φ_i, φ_j)` over all pairs of a phase
//! vector.
//!
//! For the sine-lag family `A sin(φ_i - φ_j + ℓ) = A sin(φ_i + ℓ) cos φ_j -
//! A cos(φ_i + ℓ) sin φ_j`, so after `O(n)` trigonometric calls every pair
//! costs two multiplications. Tabulated functions are interpolated per pair.

use crate::model::{CouplingFamily, CouplingSpec};

pub(crate) trait PairEval: Sync {
    fn at(&self, i: usize, j: usize) -> f64;

    /// Writes the values for row `i` into `out`, one per column.
    fn fill_row(&self, i: usize, out: &mut [f64]);
}

/// `cos φ_j`, `sin φ_j` for one phase vector, shared by `D` and `H`.
pub(crate) struct Trig {
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl Trig {
    pub fn new(phases: &[f64]) -> Self {
        let (sin, cos) = phases.iter().map(|p| p.sin_cos()).unzip();
        Self { cos, sin }
    }
}

pub(crate) struct SinePairs<'a> {
    row_sin: Vec<f64>,
    row_cos: Vec<f64>,
    trig: &'a Trig,
}

impl PairEval for SinePairs<'_> {
    #[inline(always)]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.row_sin[i] * self.trig.cos[j] - self.row_cos[i] * self.trig.sin[j]
    }

    #[inline(always)]
    fn fill_row(&self, i: usize, out: &mut [f64]) {
        let (s, c) = (self.row_sin[i], self.row_cos[i]);
        let n = out.len();
        let (cos, sin) = (&self.trig.cos[..n], &self.trig.sin[..n]);
        for j in 0..n {
            out[j] = s * cos[j] - c * sin[j];
        }
    }
}

pub(crate) struct TablePairs<'a> {
    spec: &'a CouplingSpec,
    phases: &'a [f64],
}

impl PairEval for TablePairs<'_> {
    #[inline(always)]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.spec.eval(self.phases[i], self.phases[j])
    }

    fn fill_row(&self, i: usize, out: &mut [f64]) {
        let u = self.phases[i];
        for (o, &v) in out.iter_mut().zip(self.phases) {
            *o = self.spec.eval(u, v);
        }
    }
}

pub(crate) enum Pairs<'a> {
    Sine(SinePairs<'a>),
    Table(TablePairs<'a>),
}

impl<'a> Pairs<'a> {
    pub fn new(spec: &'a CouplingSpec, phases: &'a [f64], trig: &'a Trig) -> Self {
        match spec.family() {
            CouplingFamily::SineLag { amplitude, lag } => {
                let (row_sin, row_cos) = phases
                    .iter()
                    .map(|p| {
                        let (s, c) = (p + lag).sin_cos();
                        (amplitude * s, amplitude * c)
                    })
                    .unzip();
                Pairs::Sine(SinePairs {
                    row_sin,
                    row_cos,
                    trig,
                })
            }
            CouplingFamily::Tabulated(_) => Pairs::Table(TablePairs { spec, phases }),
        }
    }
}

/// Runs `$body` with `$d` and `$h` bound to the concrete pair evaluators so
/// the inner loops are monomorphized.
macro_rules! with_pairs {
    ($dp:expr, $hp:expr, |$d:ident, $h:ident| $body:expr) => {
        match (&$dp, &$hp) {
            (Pairs::Sine($d), Pairs::Sine($h)) => $body,
            (Pairs::Sine($d), Pairs::Table($h)) => $body,
            (Pairs::Table($d), Pairs::Sine($h)) => $body,
            (Pairs::Table($d), Pairs::Table($h)) => $body,
        }
    };
}
pub(crate) use with_pairs;

macro_rules! with_pair {
    ($p:expr, |$x:ident| $body:expr) => {
        match &$p {
            Pairs::Sine($x) => $body,
            Pairs::Table($x) => $body,
        }
    };
}
pub(crate) use with_pair;
