use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation mismatch: expected n_max={expected}, found n_max={found}")]
    TruncationMismatch { expected: usize, found: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical guard tripped in {context}: {value:e}")]
    NumericalGuard { context: String, value: f64 },

    #[error("expectation of hermitian operator has imaginary residue {0:e}")]
    ImaginaryResidue(f64),

    #[error("state is not normalized: trace/norm deviation {0:e}")]
    NotNormalized(f64),

    #[error("dense representation of dimension {dim} exceeds cap {cap}")]
    DenseLimitExceeded { dim: usize, cap: usize },

    #[error("need at least {min} shots per basis, got {got}")]
    InsufficientShots { got: usize, min: usize },

    #[error("cannot parse state spec at `{token}`: {reason}")]
    SpecParse { token: String, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
