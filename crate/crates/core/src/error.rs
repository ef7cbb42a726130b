use thiserror::Error;

/// Errors produced by the core library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NonPositiveDefinite { row: usize, pivot: f64 },
    #[error("covariance matrix is not symmetric at ({0}, {1})")]
    NotSymmetric(usize, usize),
    #[error("invalid source: {0}")]
    InvalidSource(String),
    #[error("participant {participant} outside 1..={l}")]
    ParticipantOutOfRange { participant: usize, l: usize },
    #[error("{0} participants exceeds the enumeration cap of {max}", max = crate::sets::MAX_PARTICIPANTS)]
    TooManyParticipants(usize),
    #[error("generator set is empty")]
    EmptyGenerator,
    #[error("access structure needs at least one generator")]
    NoGenerators,
    #[error("threshold {t} outside 1..={l}")]
    ThresholdOutOfRange { t: usize, l: usize },
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("public rate must be nonnegative, got {0}")]
    NegativeRate(f64),
    #[error("rate grid is empty")]
    EmptyGrid,
    #[error("rate grid must be nonnegative and strictly increasing")]
    InvalidGrid,
    #[error("variance must be positive, got {0}")]
    DegenerateVariance(f64),
    #[error("secret length {k} exceeds the {available} input bits")]
    KTooLarge { k: usize, available: usize },
    #[error("exact enumeration needs {states} states, budget is {budget}")]
    BudgetExceeded { states: u128, budget: u128 },
    #[error("invalid protocol config: {0}")]
    InvalidConfig(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NonPositiveDefinite { .. } | Error::Numeric(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
