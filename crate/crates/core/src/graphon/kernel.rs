use std::f64::consts::TAU;

use ndarray::Array2;

use crate::error::{invalid, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum KernelFamily {
    Constant(f64),
    /// `base + amplitude * cos(2π(x - y))`.
    CosineShift { base: f64, amplitude: f64 },
    /// `c0 + cx*x + cy*y + cxy*x*y`; covers affine kernels such as `x + y`
    /// and the product kernel `x*y`.
    Bilinear { c0: f64, cx: f64, cy: f64, cxy: f64 },
    /// Values at cell-midpoint pairs of a uniform partition, bilinearly
    /// interpolated and clamped at the boundary so the kernel is continuous.
    Tabulated(Array2<f64>),
}

/// Continuous graphon `W(x, y)` on `[0, 1]^2` with certified bounds.
///
/// Every family here has its infimum and supremum attained at finitely many
/// known points (constants, the cosine extremes, bilinear corners, table
/// nodes), so `inf_bound` / `sup_bound` are exact rather than sampled.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    family: KernelFamily,
    inf_bound: f64,
    sup_bound: f64,
}

impl Kernel {
    pub fn constant(c: f64) -> Self {
        Self {
            family: KernelFamily::Constant(c),
            inf_bound: c,
            sup_bound: c,
        }
    }

    pub fn cosine_shift(base: f64, amplitude: f64) -> Self {
        Self {
            family: KernelFamily::CosineShift { base, amplitude },
            inf_bound: base - amplitude.abs(),
            sup_bound: base + amplitude.abs(),
        }
    }

    pub fn bilinear(c0: f64, cx: f64, cy: f64, cxy: f64) -> Self {
        let corners = [c0, c0 + cx, c0 + cy, c0 + cx + cy + cxy];
        Self {
            family: KernelFamily::Bilinear { c0, cx, cy, cxy },
            inf_bound: corners.iter().copied().fold(f64::INFINITY, f64::min),
            sup_bound: corners.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// `W(x, y) = x * y`.
    pub fn product() -> Self {
        Self::bilinear(0.0, 0.0, 0.0, 1.0)
    }

    pub fn tabulated(values: Array2<f64>) -> Result<Self> {
        let (r, c) = values.dim();
        if r == 0 || r != c {
            return Err(invalid("kernel", format!("table must be square and non-empty, got {r}x{c}")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("kernel", "table contains non-finite entries"));
        }
        let inf_bound = values.iter().copied().fold(f64::INFINITY, f64::min);
        let sup_bound = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            family: KernelFamily::Tabulated(values.as_standard_layout().into_owned()),
            inf_bound,
            sup_bound,
        })
    }

    pub fn family(&self) -> &KernelFamily {
        &self.family
    }

    /// `c_W = inf W`.
    pub fn inf_bound(&self) -> f64 {
        self.inf_bound
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match &self.family {
            KernelFamily::Constant(c) => *c,
            KernelFamily::CosineShift { base, amplitude } => base + amplitude * (TAU * (x - y)).cos(),
            KernelFamily::Bilinear { c0, cx, cy, cxy } => c0 + cx * x + cy * y + cxy * x * y,
            KernelFamily::Tabulated(t) => {
                let n = t.nrows();
                if n == 1 {
                    return t[[0, 0]];
                }
                let (i, fx) = node_coords(x, n);
                let (j, fy) = node_coords(y, n);
                (1.0 - fx) * ((1.0 - fy) * t[[i, j]] + fy * t[[i, j + 1]])
                    + fx * ((1.0 - fy) * t[[i + 1, j]] + fy * t[[i + 1, j + 1]])
            }
        }
    }

    /// Whether midpoint quadrature integrates the kernel exactly.
    pub fn is_bilinear(&self) -> bool {
        matches!(self.family, KernelFamily::Constant(_) | KernelFamily::Bilinear { .. })
    }
}

fn node_coords(x: f64, n: usize) -> (usize, f64) {
    let p = (x * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let i = (p.floor() as usize).min(n - 2);
    (i, p - i as f64)
}

/// Continuous initial phase profile (a real lift on `[0, 1]`):
/// `offset + slope * x + amplitude * sin(2π * wavenumber * x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseProfile {
    pub offset: f64,
    pub slope: f64,
    pub amplitude: f64,
    pub wavenumber: f64,
}

impl PhaseProfile {
    pub fn constant(value: f64) -> Self {
        Self::linear(value, 0.0)
    }

    pub fn linear(offset: f64, slope: f64) -> Self {
        Self {
            offset,
            slope,
            amplitude: 0.0,
            wavenumber: 1.0,
        }
    }

    /// Adds `amplitude * sin(2π * wavenumber * x)` to the profile.
    pub fn with_sine(self, amplitude: f64, wavenumber: f64) -> Self {
        Self {
            amplitude,
            wavenumber,
            ..self
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let base = self.offset + self.slope * x;
        if self.amplitude == 0.0 {
            base
        } else {
            base + self.amplitude * (TAU * self.wavenumber * x).sin()
        }
    }

    pub fn is_constant(&self) -> bool {
        self.slope == 0.0 && self.amplitude == 0.0
    }
}
