//! Model ingredients: torus arithmetic, the coupling function `D`, the
//! plasticity function `H`, intrinsic frequencies and the full problem
//! definition [`ModelSpec`].
//!
//! Phases are carried as unconstrained real lifts everywhere in the crate;
//! [`TorusAngle::wrapped`] and [`torus_distance`] are the only places where the
//! identification `R / 2πZ` is applied.

use std::f64::consts::{FRAC_PI_2, TAU};
use std::fmt;

use serde::Serialize;

use crate::error::{invalid, Result};

/// Geodesic distance on the circle `R / 2πZ`, in `[0, π]`.
pub fn torus_distance(u: f64, v: f64) -> f64 {
    let d = (u - v).rem_euclid(TAU);
    d.min(TAU - d).max(0.0)
}

/// A phase value. The stored value is a real lift; use [`TorusAngle::wrapped`]
/// for the canonical representative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusAngle(pub f64);

impl TorusAngle {
    /// Canonical representative in `[0, 2π)`.
    pub fn wrapped(self) -> f64 {
        let r = self.0.rem_euclid(TAU);
        if r >= TAU {
            0.0
        } else {
            r
        }
    }

    pub fn distance(self, other: TorusAngle) -> f64 {
        torus_distance(self.0, other.0)
    }
}

impl From<f64> for TorusAngle {
    fn from(v: f64) -> Self {
        TorusAngle(v)
    }
}

/// A function on the 2-torus sampled on a uniform `m x m` grid over
/// `[0, 2π)^2` and evaluated by periodic bilinear interpolation.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicTable {
    size: usize,
    values: Vec<f64>,
}

impl PeriodicTable {
    /// `values` is row-major, `values[a * size + b]` is the value at
    /// `(2πa/size, 2πb/size)`.
    pub fn new(size: usize, values: Vec<f64>) -> Result<Self> {
        if size < 2 {
            return Err(invalid("size", "a periodic table needs at least 2 nodes per axis"));
        }
        if values.len() != size * size {
            return Err(invalid(
                "values",
                format!("expected {} entries, found {}", size * size, values.len()),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "table contains non-finite entries"));
        }
        Ok(Self { size, values })
    }

    /// Tabulates `f` on the grid.
    pub fn from_fn(size: usize, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let h = TAU / size as f64;
        let values = (0..size * size)
            .map(|k| f((k / size) as f64 * h, (k % size) as f64 * h))
            .collect();
        Self::new(size, values)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn at(&self, a: usize, b: usize) -> f64 {
        self.values[(a % self.size) * self.size + (b % self.size)]
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let m = self.size as f64;
        let pu = TorusAngle(u).wrapped() / TAU * m;
        let pv = TorusAngle(v).wrapped() / TAU * m;
        let (a, fu) = split_cell(pu, self.size);
        let (b, fv) = split_cell(pv, self.size);
        let v00 = self.at(a, b);
        let v10 = self.at(a + 1, b);
        let v01 = self.at(a, b + 1);
        let v11 = self.at(a + 1, b + 1);
        (1.0 - fu) * ((1.0 - fv) * v00 + fv * v01) + fu * ((1.0 - fv) * v10 + fv * v11)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Upper bound on the Lipschitz constant of the interpolant with respect
    /// to the Euclidean metric on the torus: inside each cell the gradient is
    /// a convex combination of neighbouring difference quotients.
    pub fn lipschitz(&self) -> f64 {
        let h = TAU / self.size as f64;
        let mut du: f64 = 0.0;
        let mut dv: f64 = 0.0;
        for a in 0..self.size {
            for b in 0..self.size {
                du = du.max((self.at(a + 1, b) - self.at(a, b)).abs());
                dv = dv.max((self.at(a, b + 1) - self.at(a, b)).abs());
            }
        }
        (du / h).hypot(dv / h)
    }
}

fn split_cell(p: f64, size: usize) -> (usize, f64) {
    let base = p.floor();
    let idx = (base as usize).min(size - 1);
    (idx, (p - idx as f64).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub enum CouplingFamily {
    /// `amplitude * sin(u - v + lag)`.
    SineLag { amplitude: f64, lag: f64 },
    Tabulated(PeriodicTable),
}

/// A Lipschitz function `T^2 -> R` (used for both `D` and `H`) together with
/// its sup norm and Lipschitz constant.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingSpec {
    family: CouplingFamily,
    sup_norm: f64,
    lipschitz: f64,
}

impl CouplingSpec {
    pub fn sine_lag(amplitude: f64, lag: f64) -> Self {
        Self {
            family: CouplingFamily::SineLag { amplitude, lag },
            sup_norm: amplitude.abs(),
            lipschitz: std::f64::consts::SQRT_2 * amplitude.abs(),
        }
    }

    pub fn tabulated(table: PeriodicTable) -> Self {
        Self {
            sup_norm: table.sup_norm(),
            lipschitz: table.lipschitz(),
            family: CouplingFamily::Tabulated(table),
        }
    }

    pub fn zero() -> Self {
        Self::sine_lag(0.0, 0.0)
    }

    pub fn family(&self) -> &CouplingFamily {
        &self.family
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn is_zero(&self) -> bool {
        self.sup_norm == 0.0
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        match &self.family {
            CouplingFamily::SineLag { amplitude, lag } => amplitude * (u - v + lag).sin(),
            CouplingFamily::Tabulated(t) => t.eval(u, v),
        }
    }
}

/// Evaluates a coupling or plasticity function at a pair of angles.
pub fn eval_coupling(spec: &CouplingSpec, u: TorusAngle, v: TorusAngle) -> f64 {
    spec.eval(u.0, v.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyFamily {
    Constant(f64),
    /// `intercept + slope * x`.
    Affine { intercept: f64, slope: f64 },
    /// Values at the midpoints of a uniform partition of `[0, 1]`, linearly
    /// interpolated and held constant beyond the outermost midpoints.
    Tabulated(Vec<f64>),
}

/// Intrinsic frequency `ω(x)`. Frequencies depend on the vertex only; the
/// phase and time arguments of the general model are not used.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencySpec {
    family: FrequencyFamily,
    lipschitz: f64,
    sup_norm: f64,
}

impl FrequencySpec {
    pub fn constant(value: f64) -> Self {
        Self {
            family: FrequencyFamily::Constant(value),
            lipschitz: 0.0,
            sup_norm: value.abs(),
        }
    }

    pub fn affine(intercept: f64, slope: f64) -> Self {
        Self {
            family: FrequencyFamily::Affine { intercept, slope },
            lipschitz: slope.abs(),
            sup_norm: intercept.abs().max((intercept + slope).abs()),
        }
    }

    pub fn tabulated(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("omega", "tabulated frequency needs at least one value"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("omega", "tabulated frequency contains non-finite values"));
        }
        let m = values.len() as f64;
        let lipschitz = values
            .windows(2)
            .fold(0.0_f64, |acc, w| acc.max((w[1] - w[0]).abs() * m));
        let sup_norm = values.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        Ok(Self {
            family: FrequencyFamily::Tabulated(values),
            lipschitz,
            sup_norm,
        })
    }

    pub fn family(&self) -> &FrequencyFamily {
        &self.family
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.family {
            FrequencyFamily::Constant(c) => *c,
            FrequencyFamily::Affine { intercept, slope } => intercept + slope * x,
            FrequencyFamily::Tabulated(values) => {
                let m = values.len();
                let p = (x * m as f64 - 0.5).clamp(0.0, (m - 1) as f64);
                let i = (p.floor() as usize).min(m.saturating_sub(2));
                if m == 1 {
                    return values[0];
                }
                let f = p - i as f64;
                (1.0 - f) * values[i] + f * values[i + 1]
            }
        }
    }

    /// Returns a copy with `delta` added to every frequency.
    pub fn shifted(&self, delta: f64) -> Self {
        match &self.family {
            FrequencyFamily::Constant(c) => Self::constant(c + delta),
            FrequencyFamily::Affine { intercept, slope } => Self::affine(intercept + delta, *slope),
            FrequencyFamily::Tabulated(values) => {
                Self::tabulated(values.iter().map(|v| v + delta).collect())
                    .expect("shifting finite values keeps them finite")
            }
        }
    }

    /// `sup_x |ω(x) - ω'(x)|`. Exact when both are constant or affine
    /// (the difference is affine, so the extremes sit at the endpoints);
    /// otherwise sampled on a grid that contains every interpolation node.
    pub fn sup_distance(&self, other: &FrequencySpec) -> f64 {
        let affine = |f: &FrequencyFamily| {
            matches!(f, FrequencyFamily::Constant(_) | FrequencyFamily::Affine { .. })
        };
        let gap = |x: f64| (self.eval(x) - other.eval(x)).abs();
        if affine(&self.family) && affine(&other.family) {
            return gap(0.0).max(gap(1.0));
        }
        let mut xs: Vec<f64> = (0..=4096).map(|k| k as f64 / 4096.0).collect();
        for f in [&self.family, &other.family] {
            if let FrequencyFamily::Tabulated(values) = f {
                let m = values.len() as f64;
                xs.extend((0..values.len()).map(|i| (i as f64 + 0.5) / m));
            }
        }
        xs.into_iter().fold(0.0, |acc, x| acc.max(gap(x)))
    }
}

/// Complete problem definition for the coupled phase/weight system on the
/// time window `[t0, t0 + horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub coupling: CouplingSpec,
    pub plasticity: CouplingSpec,
    pub omega: FrequencySpec,
    epsilon: f64,
    t0: f64,
    horizon: f64,
}

impl ModelSpec {
    pub fn new(
        coupling: CouplingSpec,
        plasticity: CouplingSpec,
        omega: FrequencySpec,
        epsilon: f64,
        t0: f64,
        horizon: f64,
    ) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(invalid("epsilon", format!("must be finite and >= 0, got {epsilon}")));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid("T", format!("must be finite and > 0, got {horizon}")));
        }
        if !t0.is_finite() {
            return Err(invalid("t0", "must be finite"));
        }
        Ok(Self {
            coupling,
            plasticity,
            omega,
            epsilon,
            t0,
            horizon,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Length `T` of the time window.
    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn t_end(&self) -> f64 {
        self.t0 + self.horizon
    }

    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        Self::new(
            self.coupling.clone(),
            self.plasticity.clone(),
            self.omega.clone(),
            self.epsilon,
            self.t0,
            horizon,
        )
    }

    pub fn with_omega(&self, omega: FrequencySpec) -> Self {
        Self {
            omega,
            ..self.clone()
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let coupling = |c: &CouplingSpec| match c.family() {
            CouplingFamily::SineLag { amplitude, lag } if *lag < 0.0 => {
                format!("{amplitude}*sin(u-v-{})", -lag)
            }
            CouplingFamily::SineLag { amplitude, lag } => format!("{amplitude}*sin(u-v+{lag})"),
            CouplingFamily::Tabulated(t) => format!("table[{}]", t.size()),
        };
        let omega = match self.omega.family() {
            FrequencyFamily::Constant(c) => format!("{c}"),
            FrequencyFamily::Affine { intercept, slope } if *slope < 0.0 => format!("{intercept}-{}x", -slope),
            FrequencyFamily::Affine { intercept, slope } => format!("{intercept}+{slope}x"),
            FrequencyFamily::Tabulated(v) => format!("table[{}]", v.len()),
        };
        write!(
            f,
            "D={}; H={}; omega={}; eps={}; t=[{}, {}]",
            coupling(&self.coupling),
            coupling(&self.plasticity),
            omega,
            self.epsilon,
            self.t0,
            self.t_end()
        )
    }
}

/// Lag `b` of the Hebbian plasticity preset.
pub const HEBBIAN_LAG: f64 = 0.0;
/// Lag `b` of the spike-timing-dependent plasticity preset.
pub const STDP_LAG: f64 = -FRAC_PI_2;

/// Adaptive Kuramoto model with `D(u,v) = sin(u - v + a)`,
/// `H(u,v) = sin(u - v + b)` and constant frequency `omega0`.
pub fn make_berner(omega0: f64, a: f64, b: f64, epsilon: f64, t0: f64, horizon: f64) -> Result<ModelSpec> {
    ModelSpec::new(
        CouplingSpec::sine_lag(1.0, a),
        CouplingSpec::sine_lag(1.0, b),
        FrequencySpec::constant(omega0),
        epsilon,
        t0,
        horizon,
    )
}

pub fn hebbian(omega0: f64, a: f64, epsilon: f64, t0: f64, horizon: f64) -> Result<ModelSpec> {
    make_berner(omega0, a, HEBBIAN_LAG, epsilon, t0, horizon)
}

pub fn stdp(omega0: f64, a: f64, epsilon: f64, t0: f64, horizon: f64) -> Result<ModelSpec> {
    make_berner(omega0, a, STDP_LAG, epsilon, t0, horizon)
}
