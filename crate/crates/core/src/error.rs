use thiserror::Error;

/// Errors produced by the estimation, loss and risk routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("negative weight {value} at index {index}")]
    NegativeWeight { index: usize, value: f64 },

    #[error("non-finite weight {value} at index {index}")]
    NonFiniteWeight { index: usize, value: f64 },

    #[error("weights sum to {sum}, outside tolerance of 1")]
    SumOutOfTolerance { sum: f64 },

    #[error("alphabet size {k} is too small (need at least 2)")]
    AlphabetTooSmall { k: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("symbol {symbol} out of range for alphabet of size {k}")]
    SymbolOutOfRange { symbol: usize, k: usize },

    #[error("absolute continuity violated at symbol {index}: q = 0 < p")]
    AbsoluteContinuityViolation { index: usize },

    #[error("absolute continuity violated in row {row} at symbol {index}")]
    ConditionalContinuityViolation { row: usize, index: usize },

    #[error("unknown generator '{0}' (expected kl, chi2, hellinger2 or lecam)")]
    UnknownGenerator(String),

    #[error("empirical estimator has no output for an empty sample")]
    EmptySampleNoPrior,

    #[error("enumeration of {size} count vectors exceeds cap {cap}")]
    EnumerationTooLarge { size: f64, cap: f64 },

    #[error("distribution has entry {min_entry} below simplex floor {delta}")]
    ConstraintViolated { min_entry: f64, delta: f64 },

    #[error("risk table covers 0..{len} but {needed} entries are needed")]
    TableTooShort { len: usize, needed: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
