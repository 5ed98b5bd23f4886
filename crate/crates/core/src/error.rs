use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: {lhs:?} vs {rhs:?}")]
    Dimension {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },
    #[error("degenerate neuron model: {0}")]
    DegenerateModel(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("state error: {0}")]
    State(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("label error: {0}")]
    Label(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("length error: expected {expected} bytes, found {found}")]
    Length { expected: usize, found: usize },
    #[error("rate error: {0}")]
    Rate(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(op: &'static str, lhs: &[usize], rhs: &[usize]) -> Self {
        Error::Dimension {
            op,
            lhs: lhs.to_vec(),
            rhs: rhs.to_vec(),
        }
    }
}
