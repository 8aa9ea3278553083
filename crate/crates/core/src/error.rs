use thiserror::Error;

pub type Result<T, E = GraspError> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraspError {
    #[error("negative weight {value} at ({row}, {col})")]
    NegativeWeight { row: usize, col: usize, value: f64 },
    #[error("attack weight {value} at ({row}, {col}) exceeds 1")]
    WeightAboveOne { row: usize, col: usize, value: f64 },
    #[error("non-finite value at ({row}, {col})")]
    NonFiniteWeight { row: usize, col: usize },
    #[error("matrix is not square: {rows} rows, row {bad_row} has {len} entries")]
    NonSquareMatrix { rows: usize, bad_row: usize, len: usize },
    #[error("duplicate argument id `{0}`")]
    DuplicateArgumentId(String),
    #[error("empty argument id")]
    EmptyArgumentId,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("non-finite entry in input vector at index {0}")]
    NonFiniteInput(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("iteration did not converge within {max_iters} iterations (residual {residual:e})")]
    NonConvergence { max_iters: usize, residual: f64 },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("unknown argument `{0}`")]
    UnknownArgument(String),
    #[error("line {line}: unknown argument `{id}`")]
    UnknownArgumentAt { line: usize, id: String },
    #[error("rankings do not cover the same items: {0}")]
    MismatchedItems(String),
    #[error("k = {k} exceeds ranking length {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("exact Kemeny search limited to {max} items, got {n}")]
    TooLarge { n: usize, max: usize },
    #[error("line {line}: attack_score {score} outside [0, 1]")]
    ScoreOutOfRange { line: usize, score: f64 },
    #[error("line {line}: duplicate pair ({from}, {to})")]
    DuplicatePair { line: usize, from: String, to: String },
    #[error("line {line}: malformed record: {message}")]
    MalformedRecord { line: usize, message: String },
    #[error("duplicate edge ({from}, {to})")]
    DuplicateEdge { from: String, to: String },
    #[error("invalid format: {0}")]
    Format(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl GraspError {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, err: impl std::fmt::Display) -> Self {
        GraspError::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
