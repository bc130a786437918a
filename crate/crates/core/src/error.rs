use thiserror::Error;

use crate::graphon::AssumptionReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {0} lies outside [0, 1]")]
    OutOfDomain(f64),

    #[error("refinement size {target} is not a multiple of {n}")]
    NotMultiple { n: usize, target: usize },

    #[error("snapshot times differ at index {index}: {left} vs {right}")]
    TimeMismatch { index: usize, left: f64, right: f64 },

    #[error("non-finite state at t = {t} ({what})")]
    BlowUp { t: f64, what: &'static str },

    #[error(
        "Picard iteration did not contract: {iterations} iterations on a window of {window_steps} \
         steps starting at t = {start} (M3 = {m3}, window bound t* = {t_star})"
    )]
    NonContraction {
        start: f64,
        window_steps: usize,
        iterations: usize,
        m3: f64,
        t_star: f64,
    },

    #[error("model is not on the analytic family: {0}")]
    UnsupportedModel(&'static str),

    #[error("assumption check failed: {}", .0.failures().join(", "))]
    AssumptionsFailed(Box<AssumptionReport>),

    #[error("malformed table: {0}")]
    Table(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
