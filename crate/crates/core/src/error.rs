use thiserror::Error;

/// Errors raised by model evaluation, root finding and fitting.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite {what}: {value}")]
    NonFinite { what: &'static str, value: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },

    #[error("unknown mode label `{0}`")]
    UnknownMode(String),

    #[error("operation requires at least one magnon mode")]
    NoModes,

    #[error("empty grid: {0}")]
    EmptyGrid(&'static str),

    #[error("grid `{0}` is not strictly ascending")]
    GridNotAscending(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("characteristic equation pole at {pole_hz} Hz (evaluated at {at_hz} Hz)")]
    NearPole { pole_hz: f64, at_hz: f64 },

    #[error("no sign change of the residual in [{lo_hz}, {hi_hz}] Hz")]
    NoBracket { lo_hz: f64, hi_hz: f64 },

    #[error("{count} roots in [{lo_hz}, {hi_hz}] Hz, expected exactly one")]
    MultipleRoots { count: usize, lo_hz: f64, hi_hz: f64 },

    #[error("root finder did not converge within {0} iterations")]
    NoConvergence(usize),

    #[error("under-determined fit: {points} points for {coefficients} coefficients")]
    Underdetermined { points: usize, coefficients: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: impl Into<String>, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name: name.into(),
        reason: reason.into(),
    }
}
