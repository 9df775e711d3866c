use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// A matrix failed a structural check (shape, symmetry, diagonal, definiteness).
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// Columns with zero sample variance, reported by 0-based index.
    #[error("zero-variance columns: {0:?}")]
    DegenerateColumns(Vec<usize>),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A numeric routine failed to produce a usable answer.
    #[error("numeric failure in {op}: {reason}")]
    Numeric { op: &'static str, reason: String },

    /// A covariance engine failed for a specific pair of tests.
    #[error("pair ({j}, {k}): {source}")]
    Pair {
        j: usize,
        k: usize,
        #[source]
        source: Box<Error>,
    },

    /// Malformed input data, with 1-based row/column coordinates when known.
    #[error("parse error{}: {reason}", location(*.row, *.col))]
    Parse {
        row: Option<usize>,
        col: Option<usize>,
        reason: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn location(row: Option<usize>, col: Option<usize>) -> String {
    match (row, col) {
        (Some(r), Some(c)) => format!(" at row {r}, column {c}"),
        (Some(r), None) => format!(" at row {r}"),
        (None, Some(c)) => format!(" at column {c}"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidArgument {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn numeric(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Numeric {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn parse(row: Option<usize>, col: Option<usize>, reason: impl Into<String>) -> Self {
        Error::Parse {
            row,
            col,
            reason: reason.into(),
        }
    }

    /// True for failures caused by the numbers rather than by malformed input.
    pub fn is_numeric(&self) -> bool {
        match self {
            Error::Numeric { .. } | Error::DegenerateColumns(_) => true,
            Error::Pair { source, .. } => source.is_numeric(),
            _ => false,
        }
    }
}
