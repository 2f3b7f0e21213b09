use thiserror::Error;

/// Errors raised by graph construction, spectral operators, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A vertex with zero degree was referenced by an operator that divides by √d.
    #[error("degenerate graph: {0}")]
    DegenerateGraph(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("filter misuse: {0}")]
    FilterMisuse(String),

    #[error("undefined spectral gap: {0}")]
    UndefinedGap(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}
