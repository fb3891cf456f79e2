use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("timestamp sequences differ at sample {index}")]
    TimestampMismatch { index: usize },

    #[error("timestamps must strictly increase (sample {index})")]
    NonIncreasingTimestamps { index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("measure is undefined on an empty series")]
    EmptySeries,

    #[error("corridor half-width {halfwidth} admits no path between lengths {len_a} and {len_b}")]
    CorridorTooNarrow {
        len_a: usize,
        len_b: usize,
        halfwidth: usize,
    },

    #[error("missing or invalid parameters for {0}")]
    EmptyParams(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("path enumeration limited to lengths <= {max}, got {len_a} x {len_b}")]
    TooLarge {
        len_a: usize,
        len_b: usize,
        max: usize,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("ragged rows: line {line} has {found} values, expected {expected}")]
    RaggedRows {
        line: usize,
        expected: usize,
        found: usize,
    },

    #[error("input contains no records")]
    EmptyFile,

    #[error("evaluating items ({row}, {col}): {source}")]
    Item {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
