use thiserror::Error;

/// Errors raised by the rate engines and the protocol simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A numeric argument is outside the domain of the model (variance ≤ 0, p ∉ [0,1], ...).
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    /// A threshold list failed validation at `index`.
    #[error("invalid threshold at index {index}: {reason}")]
    InvalidThresholds { index: usize, reason: String },

    /// A conditional quantity was requested on a zero-probability event.
    #[error("conditional on a zero-probability cell ({0}, {1})")]
    UndefinedConditional(usize, usize),

    /// A desk-scale enumeration limit was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
