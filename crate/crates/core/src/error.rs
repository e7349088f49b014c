use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("design must have at least one run and one factor")]
    EmptyDesign,

    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("factor {factor} needs at least 2 levels, got {levels}")]
    TooFewLevels { factor: usize, levels: usize },

    #[error("cell ({row}, {factor}) = {value} is outside levels 0..{levels}")]
    LevelOutOfRange {
        row: usize,
        factor: usize,
        value: usize,
        levels: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid permutation for factor {factor}: {reason}")]
    InvalidPermutation { factor: usize, reason: String },

    #[error("column index {index} out of range for {columns} columns")]
    ColumnOutOfRange { index: usize, columns: usize },

    #[error("column index {index} listed more than once")]
    DuplicateColumn { index: usize },

    #[error("{factors} factors exceed the limit of {limit} for full tuple enumeration")]
    TooManyFactors { factors: usize, limit: usize },

    #[error("operation requires every factor to have 3 levels (factor {factor} has {levels})")]
    NotThreeLevel { factor: usize, levels: usize },

    #[error(
        "linear-effect information matrix is singular; collinear linear contrasts for factors {factors:?}"
    )]
    SingularLinearModel { factors: Vec<usize> },

    #[error("covariance matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("covariance matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("pattern lengths differ: {left} vs {right}")]
    PatternLength { left: usize, right: usize },

    #[error("number of factors {requested} out of range 1..={available}")]
    FactorCountOutOfRange { requested: usize, available: usize },

    #[error("catalog is empty")]
    EmptyCatalog,

    #[error("precondition failed for {check}: {reason}")]
    Precondition { check: String, reason: String },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{0}")]
    Input(String),
}
