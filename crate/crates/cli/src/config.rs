//! TOML run configuration.
//!
//! ```toml
//! [model]
//! preset = "berner"        # berner | hebbian | stdp
//! omega0 = 1.0
//! a = 0.3
//! b = 0.7
//! epsilon = 0.05
//! t0 = 0.0
//! horizon = 4.0
//!
//! [kernel]
//! family = "cosine"        # constant | cosine | bilinear | product | csv
//! base = 1.0
//! amplitude = 0.5
//!
//! [initial_phase]
//! family = "linear"        # constant | linear | sine
//! slope = 6.283185307179586
//!
//! [numerics]
//! n = 16
//! dt = 1e-3
//! stride = 10
//!
//! [output]
//! dir = "out"
//! ```
//!
//! Relative paths are resolved against the directory of the config file.

use std::path::{Path, PathBuf};

use adaptnet::graphon::{
    discretize_phases, discretize_weights_average, discretize_weights_sample, read_step_graphon_csv, Kernel,
    Partition, PhaseProfile, StepGraphon, DEFAULT_QUADRATURE,
};
use adaptnet::model::{
    CouplingSpec, FrequencySpec, ModelSpec, PeriodicTable, HEBBIAN_LAG, STDP_LAG,
};
use adaptnet::dynamics::SystemState;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Berner,
    Hebbian,
    Stdp,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    #[serde(default = "default_preset")]
    pub preset: Preset,
    #[serde(default)]
    pub omega0: f64,
    /// Slope of an affine frequency profile `omega0 + omega_slope x`.
    #[serde(default)]
    pub omega_slope: f64,
    /// Tabulated frequency profile at the cell midpoints of a uniform grid.
    pub omega_table: Option<Vec<f64>>,
    #[serde(default)]
    pub a: f64,
    /// Plasticity lag; fixed by the `hebbian` and `stdp` presets.
    pub b: Option<f64>,
    #[serde(default = "one")]
    pub coupling_amplitude: f64,
    #[serde(default = "one")]
    pub plasticity_amplitude: f64,
    /// Periodic table for `D` (kernel CSV layout), replacing the sine-lag form.
    pub coupling_table: Option<PathBuf>,
    /// Periodic table for `H`.
    pub plasticity_table: Option<PathBuf>,
    /// Zero coupling and zero frequencies, so phases never move.
    #[serde(default)]
    pub frozen_phases: bool,
    pub epsilon: f64,
    #[serde(default)]
    pub t0: f64,
    pub horizon: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelConfig {
    Constant { value: f64 },
    Cosine { base: f64, amplitude: f64 },
    Bilinear {
        #[serde(default)]
        c0: f64,
        #[serde(default)]
        cx: f64,
        #[serde(default)]
        cy: f64,
        #[serde(default)]
        cxy: f64,
    },
    Product,
    Csv { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum PhaseConfig {
    Constant {
        value: f64,
    },
    Linear {
        #[serde(default)]
        offset: f64,
        slope: f64,
    },
    Sine {
        #[serde(default)]
        offset: f64,
        #[serde(default)]
        slope: f64,
        amplitude: f64,
        #[serde(default = "one")]
        wavenumber: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightDiscretization {
    #[default]
    Average,
    Sample,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    pub n: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub n_ref: Option<usize>,
    pub dt: f64,
    pub dt_ref: Option<f64>,
    #[serde(default = "one_usize")]
    pub stride: usize,
    #[serde(default = "default_quadrature")]
    pub quadrature: usize,
    #[serde(default)]
    pub weights: WeightDiscretization,
    /// Allowed deviation from the closed form when the initial data lies on
    /// the synchronized manifold.
    #[serde(default = "default_sync_tolerance")]
    pub sync_tolerance: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "yes")]
    pub trajectory: bool,
    #[serde(default = "yes")]
    pub weights: bool,
    #[serde(default)]
    pub wrap_phases: bool,
    #[serde(default = "yes")]
    pub order_parameter: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            trajectory: true,
            weights: true,
            wrap_phases: false,
            order_parameter: true,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_picard_tol")]
    pub picard_tol: f64,
    #[serde(default = "default_max_iter")]
    pub picard_max_iter: usize,
    #[serde(default = "default_picard_tolerance")]
    pub picard_tolerance: f64,
    #[serde(default = "default_exact_tolerance")]
    pub exact_tolerance: f64,
    #[serde(default = "default_max_n")]
    pub max_n: usize,
    #[serde(default = "default_max_horizon")]
    pub max_horizon: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            picard_tol: default_picard_tol(),
            picard_max_iter: default_max_iter(),
            picard_tolerance: default_picard_tolerance(),
            exact_tolerance: default_exact_tolerance(),
            max_n: default_max_n(),
            max_horizon: default_max_horizon(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub kernel: KernelConfig,
    pub initial_phase: PhaseConfig,
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

fn default_preset() -> Preset {
    Preset::Berner
}
fn one() -> f64 {
    1.0
}
fn one_usize() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_quadrature() -> usize {
    DEFAULT_QUADRATURE
}
fn default_sync_tolerance() -> f64 {
    1e-6
}
fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_picard_tol() -> f64 {
    1e-6
}
fn default_max_iter() -> usize {
    100
}
fn default_picard_tolerance() -> f64 {
    1e-5
}
fn default_exact_tolerance() -> f64 {
    1e-6
}
fn default_max_n() -> usize {
    64
}
fn default_max_horizon() -> f64 {
    2.0
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<usize>,
    pub ns: Option<Vec<usize>>,
    pub n_ref: Option<usize>,
    pub dt: Option<f64>,
    pub dt_ref: Option<f64>,
    pub stride: Option<usize>,
    pub epsilon: Option<f64>,
    pub horizon: Option<f64>,
    pub out_dir: Option<PathBuf>,
    pub weights: Option<bool>,
    pub wrap_phases: Option<bool>,
}

fn field(name: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Validation(format!("{name}: {reason}"))
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Validation(e.to_string()))?;
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &Overrides) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text, path.parent().unwrap_or(Path::new(".")))?;
        cfg.apply(overrides);
        cfg.validate()?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let KernelConfig::Csv { path } = &mut self.kernel {
            join(path);
        }
        if let Some(p) = self.model.coupling_table.as_mut() {
            join(p);
        }
        if let Some(p) = self.model.plasticity_table.as_mut() {
            join(p);
        }
        join(&mut self.output.dir);
    }

    pub fn apply(&mut self, o: &Overrides) {
        let num = &mut self.numerics;
        if let Some(v) = o.n {
            num.n = Some(v);
        }
        if let Some(v) = &o.ns {
            num.ns = Some(v.clone());
        }
        if let Some(v) = o.n_ref {
            num.n_ref = Some(v);
        }
        if let Some(v) = o.dt {
            num.dt = v;
        }
        if let Some(v) = o.dt_ref {
            num.dt_ref = Some(v);
        }
        if let Some(v) = o.stride {
            num.stride = v;
        }
        if let Some(v) = o.epsilon {
            self.model.epsilon = v;
        }
        if let Some(v) = o.horizon {
            self.model.horizon = v;
        }
        if let Some(v) = &o.out_dir {
            self.output.dir = v.clone();
        }
        if let Some(v) = o.weights {
            self.output.weights = v;
        }
        if let Some(v) = o.wrap_phases {
            self.output.wrap_phases = v;
        }
    }

    /// Range checks and file existence; divisibility of the study sizes.
    pub fn validate(&self) -> Result<(), CliError> {
        let m = &self.model;
        if !(m.epsilon >= 0.0 && m.epsilon.is_finite()) {
            return Err(field("model.epsilon", format!("must be finite and >= 0, got {}", m.epsilon)));
        }
        if !(m.horizon > 0.0 && m.horizon.is_finite()) {
            return Err(field("model.horizon", format!("must be finite and > 0, got {}", m.horizon)));
        }
        if !m.t0.is_finite() {
            return Err(field("model.t0", "must be finite"));
        }
        if matches!(m.preset, Preset::Hebbian | Preset::Stdp) && m.b.is_some() {
            return Err(field("model.b", "the hebbian and stdp presets fix the plasticity lag"));
        }
        for (name, path) in [
            ("model.coupling_table", &m.coupling_table),
            ("model.plasticity_table", &m.plasticity_table),
        ] {
            if let Some(p) = path {
                if !p.is_file() {
                    return Err(field(name, format!("file {} does not exist", p.display())));
                }
            }
        }
        if let KernelConfig::Csv { path } = &self.kernel {
            if !path.is_file() {
                return Err(field("kernel.path", format!("file {} does not exist", path.display())));
            }
        }
        let num = &self.numerics;
        if !(num.dt > 0.0 && num.dt.is_finite()) {
            return Err(field("numerics.dt", format!("must be finite and > 0, got {}", num.dt)));
        }
        if let Some(d) = num.dt_ref {
            if !(d > 0.0 && d.is_finite()) {
                return Err(field("numerics.dt_ref", format!("must be finite and > 0, got {d}")));
            }
        }
        if num.stride == 0 {
            return Err(field("numerics.stride", "must be >= 1"));
        }
        if num.quadrature == 0 {
            return Err(field("numerics.quadrature", "must be >= 1"));
        }
        if num.n == Some(0) {
            return Err(field("numerics.n", "must be >= 1"));
        }
        if let Some(ns) = &num.ns {
            if ns.is_empty() || ns.contains(&0) {
                return Err(field("numerics.ns", "needs at least one size, each >= 1"));
            }
            if let Some(n_ref) = num.n_ref {
                if let Some(bad) = ns.iter().find(|&&n| n_ref % n != 0) {
                    return Err(field("numerics.ns", format!("{bad} does not divide n_ref = {n_ref}")));
                }
            }
        }
        if num.n_ref == Some(0) {
            return Err(field("numerics.n_ref", "must be >= 1"));
        }
        Ok(())
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let m = &self.model;
        let lag_b = match m.preset {
            Preset::Berner => m.b.unwrap_or(0.0),
            Preset::Hebbian => HEBBIAN_LAG,
            Preset::Stdp => STDP_LAG,
        };
        let table = |path: &Path| -> Result<CouplingSpec, CliError> {
            let g = read_step_graphon_csv(path)?;
            Ok(CouplingSpec::tabulated(PeriodicTable::new(
                g.n(),
                g.weights().iter().copied().collect(),
            )?))
        };
        let mut coupling = match &m.coupling_table {
            Some(p) => table(p)?,
            None => CouplingSpec::sine_lag(m.coupling_amplitude, m.a),
        };
        let plasticity = match &m.plasticity_table {
            Some(p) => table(p)?,
            None => CouplingSpec::sine_lag(m.plasticity_amplitude, lag_b),
        };
        let mut omega = match &m.omega_table {
            Some(values) => FrequencySpec::tabulated(values.clone())?,
            None if m.omega_slope != 0.0 => FrequencySpec::affine(m.omega0, m.omega_slope),
            None => FrequencySpec::constant(m.omega0),
        };
        if m.frozen_phases {
            coupling = CouplingSpec::zero();
            omega = FrequencySpec::constant(0.0);
        }
        Ok(ModelSpec::new(coupling, plasticity, omega, m.epsilon, m.t0, m.horizon)?)
    }

    pub fn kernel(&self) -> Result<Kernel, CliError> {
        Ok(match &self.kernel {
            KernelConfig::Constant { value } => Kernel::constant(*value),
            KernelConfig::Cosine { base, amplitude } => Kernel::cosine_shift(*base, *amplitude),
            KernelConfig::Bilinear { c0, cx, cy, cxy } => Kernel::bilinear(*c0, *cx, *cy, *cxy),
            KernelConfig::Product => Kernel::product(),
            KernelConfig::Csv { path } => Kernel::tabulated(read_step_graphon_csv(path)?.weights().clone())?,
        })
    }

    pub fn phase_profile(&self) -> PhaseProfile {
        match self.initial_phase {
            PhaseConfig::Constant { value } => PhaseProfile::constant(value),
            PhaseConfig::Linear { offset, slope } => PhaseProfile::linear(offset, slope),
            PhaseConfig::Sine {
                offset,
                slope,
                amplitude,
                wavenumber,
            } => PhaseProfile::linear(offset, slope).with_sine(amplitude, wavenumber),
        }
    }

    pub fn n(&self) -> Result<usize, CliError> {
        self.numerics
            .n
            .ok_or_else(|| field("numerics.n", "required by this command"))
    }

    pub fn initial_weights(&self, kernel: &Kernel, p: Partition) -> StepGraphon {
        match self.numerics.weights {
            WeightDiscretization::Average => discretize_weights_average(kernel, p, self.numerics.quadrature),
            WeightDiscretization::Sample => discretize_weights_sample(kernel, p),
        }
    }

    pub fn initial_state(&self, model: &ModelSpec, kernel: &Kernel, n: usize) -> Result<SystemState, CliError> {
        let p = Partition::new(n)?;
        let profile = self.phase_profile();
        let phases = discretize_phases(|x| profile.eval(x), p, self.numerics.quadrature);
        Ok(SystemState::new(model.t0(), phases, self.initial_weights(kernel, p))?)
    }
}
