//! Time integration of the discrete system
//!
//! ```text
//! dφ_i/dt  = ω_i + (1/n) Σ_j W_ij D(φ_i, φ_j)
//! dW_ij/dt = -ε (W_ij + H(φ_i, φ_j))
//! ```
//!
//! [`DiscreteSystem::integrate`] is a classical RK4 stepper over the combined
//! phase and weight vector. The remaining solvers exist to check it: the
//! integrating-factor weight formula, the closed form on the synchronized
//! manifold and a windowed Picard iteration.

mod exact;
mod io;
mod pairs;
mod picard;
mod state;
mod system;

pub use exact::{sync_manifold_solution, weights_exact_update};
pub use io::{
    read_trajectory, read_trajectory_csv, write_trajectory, write_trajectory_csv, TrajectoryCsvOptions,
    TrajectoryTable,
};
pub use picard::{contraction_constant, PicardSolution, PicardWindow};
pub use state::{SystemState, Trajectory};
pub use system::DiscreteSystem;
