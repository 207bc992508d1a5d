use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("matrix is not symmetric positive definite: {0}")]
    NotSpd(String),

    #[error("zero or non-positive diagonal entry at row {0}")]
    BadDiagonal(usize),

    #[error("invalid CSR structure: {0}")]
    InvalidStructure(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("level {level} out of range 1..={max}")]
    LevelOutOfRange { level: usize, max: usize },

    #[error("dimension {dim} exceeds the dense limit {limit}")]
    DenseLimitExceeded { dim: usize, limit: usize },

    #[error("PCG breakdown: zero-energy direction")]
    PcgBreakdown,

    #[error("coarsening stagnated at {0} unknowns")]
    CoarseningStagnated(usize),

    #[error("prolongator column {0} is empty")]
    EmptyAggregate(usize),

    #[error("smoother not A-convergent: {0}")]
    SmootherNotConvergent(String),

    #[error("{path}:{line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("at {coord}: {source}")]
    At {
        coord: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn dims(context: &'static str, expected: usize, found: usize) -> Self {
        Error::DimensionMismatch {
            context,
            expected,
            found,
        }
    }

    /// Attach a location (table cell, level, check name) to an error.
    pub fn at(self, coord: impl Into<String>) -> Self {
        Error::At {
            coord: coord.into(),
            source: Box::new(self),
        }
    }
}
