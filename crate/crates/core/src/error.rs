use crate::bestapprox::LatticePoint;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which column of a sequence pair an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Column {
    A,
    B,
}

impl std::fmt::Display for Column {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Column::A => f.write_str("A"),
            Column::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("prime sets S and T share the prime {0}")]
    NonDisjointPrimeSets(u64),
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("valuations of {column} do not increase at n={n} (scale parameter a too small?)")]
    ValuationNotIncreasing { column: Column, n: usize },
    #[error("floor argument for {column}_{n} is too close to an integer to certify")]
    FloorAmbiguous { column: Column, n: usize },
    #[error("divisibility violated: X_{k} does not divide X_{n}")]
    DivisibilityViolation { k: usize, n: usize },
    #[error("no valid scale parameter found within {steps} grid steps")]
    GridExhausted { steps: u64 },
    #[error("truncation level {level} needs term {level}+1 but the pair has {available} terms")]
    TruncationTooDeep { level: usize, available: usize },
    #[error("enclosure width {width} is too large for a nearest-integer decision")]
    WidthTooLarge { width: f64 },
    #[error("comparison stayed indeterminate after refinement: {0}")]
    Indeterminate(String),
    #[error("chain has {len} points, need at least {needed}")]
    ChainTooShort { len: usize, needed: usize },
    #[error("search region too large: {0}")]
    CapOverflow(String),
    #[error("integer of about {bits} bits exceeds the size limit of {limit} bits")]
    SizeLimit { bits: u64, limit: u64 },
    #[error("parameters violate the admissibility conditions: {0}")]
    Cond1Violated(String),
    #[error("empty parameter interval: {0}")]
    IntervalEmpty(String),
    #[error("validation failed: {0}")]
    ValidationFailed(String),
    #[error("N does not increase along the predicted chain at n={n}")]
    InterleavingFailed { n: usize },
    #[error("record bound violated at k={k}: {detail}")]
    BoundViolated { k: usize, detail: String },
    #[error("optimality violated: {point} beats chain point {index}")]
    ViolationFound { index: usize, point: LatticePoint },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Indeterminate(_) => 3,
            Error::CapOverflow(_) | Error::SizeLimit { .. } => 4,
            Error::ViolationFound { .. }
            | Error::BoundViolated { .. }
            | Error::InterleavingFailed { .. } => 1,
            _ => 2,
        }
    }

    /// Stable machine-readable name of the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonDisjointPrimeSets(_) => "NonDisjointPrimeSets",
            Error::NotPrime(_) => "NotPrime",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::ValuationNotIncreasing { .. } => "ValuationNotIncreasing",
            Error::FloorAmbiguous { .. } => "FloorAmbiguous",
            Error::DivisibilityViolation { .. } => "DivisibilityViolation",
            Error::GridExhausted { .. } => "GridExhausted",
            Error::TruncationTooDeep { .. } => "TruncationTooDeep",
            Error::WidthTooLarge { .. } => "WidthTooLarge",
            Error::Indeterminate(_) => "Indeterminate",
            Error::ChainTooShort { .. } => "ChainTooShort",
            Error::CapOverflow(_) => "CapOverflow",
            Error::SizeLimit { .. } => "SizeLimit",
            Error::Cond1Violated(_) => "Cond1Violated",
            Error::IntervalEmpty(_) => "IntervalEmpty",
            Error::ValidationFailed(_) => "ValidationFailed",
            Error::InterleavingFailed { .. } => "InterleavingFailed",
            Error::BoundViolated { .. } => "BoundViolated",
            Error::ViolationFound { .. } => "ViolationFound",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
        }
    }
}
