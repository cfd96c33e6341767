use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero at index {0}")]
    DivisionByZero(usize),
    #[error("division by zero at channel {channel}, row {row}, col {col}")]
    DivisionByZeroAt {
        channel: usize,
        row: usize,
        col: usize,
    },
    #[error("length {0} must be even")]
    OddLength(usize),
    #[error("dimensions {rows}x{cols} must be divisible by {by}")]
    Indivisible { rows: usize, cols: usize, by: usize },
    #[error("mask size {0} must be odd and at least 3")]
    BadMaskSize(usize),
    #[error("shape mismatch: {0:?} vs {1:?}")]
    ShapeMismatch(Vec<usize>, Vec<usize>),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed header: {0}")]
    MalformedHeader(String),
    #[error("short file: expected {expected} bytes of data, found {found}")]
    ShortFile { expected: usize, found: usize },
    #[error("unsupported maxval {0}")]
    UnsupportedMaxval(u32),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("bad magic")]
    BadMagic,
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
