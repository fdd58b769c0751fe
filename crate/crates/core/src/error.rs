use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Failures raised by the core algorithms.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    ShapeMismatch {
        op: &'static str,
        expected: (usize, usize),
        found: (usize, usize),
    },
    /// Batch normalization in training mode needs at least two rows.
    BatchTooSmall { rows: usize },
    EmptyData(&'static str),
    NonFiniteLoss { epoch: usize },
    MissingLabel(String),
    UnknownNeighborhood(String),
    RankDeficient { column: usize },
    InsufficientObservations { needed: usize, found: usize },
    InvalidParameter(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::ShapeMismatch { op, expected, found } => write!(
                f,
                "{op}: expected shape {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::BatchTooSmall { rows } => {
                write!(f, "batch norm training needs at least 2 rows, got {rows}")
            }
            Error::EmptyData(what) => write!(f, "empty input: {what}"),
            Error::NonFiniteLoss { epoch } => write!(f, "non-finite loss at epoch {epoch}"),
            Error::MissingLabel(label) => write!(f, "label class missing from data: {label}"),
            Error::UnknownNeighborhood(id) => write!(f, "unknown neighborhood id {id:?}"),
            Error::RankDeficient { column } => {
                write!(f, "design matrix is rank deficient at column {column}")
            }
            Error::InsufficientObservations { needed, found } => {
                write!(f, "need at least {needed} observations, found {found}")
            }
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
