use thiserror::Error;

/// Errors raised by channel construction, code evaluation and threshold search.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Probability vector that is negative or does not sum to one.
    #[error("invalid Pauli channel: {0}")]
    InvalidChannel(String),

    /// Code definition violates a stabilizer invariant or has an unsupported size.
    #[error("invalid code: {0}")]
    InvalidCode(String),

    /// The requested enumeration would exceed the configured step budget.
    #[error("budget exceeded: {required:.3e} steps required, budget is {budget:.3e}")]
    Budget { required: f64, budget: f64 },

    /// No sign change of `entropy - target` was found in the scanned interval.
    #[error("no bracket: {0}")]
    NoBracket(String),

    /// More than one crossing was detected while scanning for a bracket.
    #[error("non-monotone entropy: {0}")]
    NonMonotone(String),

    /// An iterative procedure did not settle within its iteration cap.
    #[error("did not converge: {0}")]
    NonConvergence(String),

    /// Malformed text input (stack files, code files, family specs).
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
