use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("state dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),

    #[error("cannot normalize a zero vector")]
    ZeroNorm,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("operation is not trace-non-increasing (largest eigenvalue of sum K^dag K is {0})")]
    NotTraceNonIncreasing(f64),

    #[error("POVM elements do not sum to identity (deviation {0:e})")]
    IncompletePovm(f64),

    #[error("encoding always fails for this input")]
    EncodingAlwaysFails,

    #[error("angle out of range: {name} = {value}")]
    AngleOutOfRange { name: &'static str, value: f64 },

    #[error("subsystem index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("unknown optical mode `{0}`")]
    UnknownMode(String),

    #[error("balanced coupler cannot encode")]
    BalancedCoupler,

    #[error("damping factor {name} = {value} exceeds 1 at reflectance {reflectance}")]
    InfeasibleDamping {
        name: &'static str,
        value: f64,
        reflectance: f64,
    },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
