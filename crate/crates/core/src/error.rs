use alloc::string::String;

/// Errors raised by state, channel and optimizer routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("duplicate subsystem label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown subsystem label `{0}`")]
    UnknownLabel(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("required dimension {required} exceeds the cap of {cap}")]
    DimensionCap { required: usize, cap: usize },
    #[error("operator is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),
    #[error("operator is not Hermitian (anti-Hermitian part {0:e})")]
    NotHermitian(f64),
    #[error("trace {0} differs from 1")]
    BadTrace(f64),
    #[error("state vector norm {0} differs from 1")]
    BadNorm(f64),
    #[error("probability {0} outside [0, 1]")]
    InvalidProbability(f64),
    #[error("Kraus operators violate completeness by {0:e}")]
    IncompleteKraus(f64),
    #[error("`{0}` is not a permutation of the state's labels")]
    NotAPermutation(String),
    #[error("expected a pure state")]
    NotPure,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
