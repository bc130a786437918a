//! Verification experiments: self-convergence in the partition size,
//! positivity of the weights and continuous-dependence envelopes.

mod bounds;
mod convergence;
mod monitor;

pub use bounds::{bounds_report, BoundParams, BoundsReport};
pub use convergence::{
    self_convergence_study, ConvergenceRecord, ConvergenceReport, ConvergenceSetup, RateRecord, DEGENERATE_ERROR,
};
pub use monitor::{
    gronwall_ic_check, gronwall_omega_check, positivity_monitor, EnvelopeKind, EnvelopeSample, GronwallReport,
    PositivityReport, ENVELOPE_SLACK,
};
