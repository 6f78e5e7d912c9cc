use alloc::string::String;

/// Errors raised by the models in this crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// A cluster index does not exist in the partition.
    #[error("unknown cluster {0}")]
    UnknownCluster(usize),
    /// A user index does not exist.
    #[error("unknown user {0}")]
    UnknownUser(usize),
    /// The partition is not a partition of the user set.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    /// An MCS level has zero probability, so conditioning on it is undefined.
    #[error("MCS level {level} has zero probability for this mean SNR")]
    DegenerateMcs {
        /// 1-based MCS level.
        level: usize,
    },
    /// Adaptive quadrature did not reach its tolerance.
    #[error("quadrature did not converge (residual estimate {residual:e})")]
    Quadrature {
        /// Last error estimate.
        residual: f64,
    },
    /// A size cap was exceeded.
    #[error("{what}: size {size} exceeds cap {cap}")]
    CapExceeded {
        /// What was capped.
        what: &'static str,
        /// Requested size.
        size: usize,
        /// Configured cap.
        cap: usize,
    },
    /// A distance constraint needs positions that were not supplied.
    #[error("user {0} has no position but a finite cluster diameter is set")]
    MissingPosition(usize),
    /// The simplex met a basis it could not pivot on reliably.
    #[error("degenerate LP basis (pivot magnitude {pivot:e})")]
    DegenerateBasis {
        /// Magnitude of the rejected pivot.
        pivot: f64,
    },
    /// No mode assignment satisfies the constraints.
    #[error("no feasible assignment")]
    NoFeasibleAssignment,
    /// A configuration value is invalid.
    #[error("invalid config `{field}`: {reason}")]
    InvalidConfig {
        /// Offending field.
        field: &'static str,
        /// Human readable reason.
        reason: String,
    },
}

/// Result alias for this crate.
pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn domain(msg: &str) -> Error {
    Error::Domain(String::from(msg))
}

pub(crate) fn invalid(field: &'static str, reason: &str) -> Error {
    Error::InvalidConfig {
        field,
        reason: String::from(reason),
    }
}
