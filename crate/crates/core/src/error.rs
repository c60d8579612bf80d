use thiserror::Error;

/// Errors produced by the completion toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must have at least one row and one column, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {actual}")]
    EntryCount {
        rows: usize,
        cols: usize,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite entry {value} at ({row}, {col})")]
    NonFinite { row: usize, col: usize, value: f64 },

    #[error("dimension mismatch: expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("matrix is numerically zero; no singular triplet survives the rank cutoff")]
    ZeroRank,

    #[error("SVD failed to converge")]
    SvdNoConvergence,

    #[error("symmetric eigendecomposition did not converge")]
    EigenNoConvergence,

    #[error("index ({row}, {col}) out of range for a {rows}x{cols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    #[error("probability {value} at ({row}, {col}) is outside [0, 1]")]
    InvalidProbability { row: usize, col: usize, value: f64 },

    #[error("sampled index ({row}, {col}) has zero probability")]
    ZeroProbability { row: usize, col: usize },

    #[error("{axis} {index} has zero leverage but nonzero data; weighted norm is undefined")]
    InfiniteWeight { axis: &'static str, index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("sample set is empty")]
    EmptySample,

    #[error("phase-one sample is degenerate: {0}")]
    DegeneratePhaseOne(String),

    #[error("calibration failed: no constant up to {cap} passed the protocol")]
    CalibrationFailed { cap: u32 },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        let line = err
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or_default();
        match err.kind() {
            csv::ErrorKind::Io(_) => Error::Io(err.to_string()),
            _ => Error::Parse {
                line,
                message: err.to_string(),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
