//! Simulation and verification tools for adaptive Kuramoto-type networks
//!
//! ```text
//! dφ_i/dt = ω_i + (1/n) Σ_j W_ij D(φ_i, φ_j)
//! dW_ij/dt = -ε (W_ij + H(φ_i, φ_j))
//! ```
//!
//! and their continuum (graphon) limits on `X = [0, 1]`.
//!
//! - [`model`]: coupling/plasticity/frequency functions and torus arithmetic.
//! - [`graphon`]: kernels, uniform partitions, discretization and lifting,
//!   positivity criteria.
//! - [`dynamics`]: RK4 integration, the integrating-factor weight formula, the
//!   synchronized-manifold closed form and a Picard fixed-point solver.
//! - [`metrics`]: torus sup distance, total variation between step graphons,
//!   the combined and time-uniform distances, order parameter.
//! - [`analysis`]: self-convergence studies, positivity monitoring and
//!   Gronwall continuous-dependence envelopes.

pub mod analysis;
pub mod dynamics;
pub mod error;
pub mod graphon;
pub mod metrics;
pub mod model;

pub use error::{Error, Result};

/// Formats a real with 17 significant digits, enough for an exact round trip.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}
