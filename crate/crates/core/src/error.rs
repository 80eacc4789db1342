use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch for {what}: expected {expected:?}, got {got:?}")]
    ShapeMismatch {
        what: &'static str,
        expected: Vec<usize>,
        got: Vec<usize>,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("empty sequence")]
    Empty,

    /// The geometry is outside what the spectral engine supports; callers
    /// are expected to fall back to a generic convolution.
    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("geometry mismatch between ledger and cost model: {0}")]
    GeometryMismatch(String),
}

impl Error {
    pub(crate) fn shape(what: &'static str, expected: &[usize], got: &[usize]) -> Self {
        Error::ShapeMismatch {
            what,
            expected: expected.to_vec(),
            got: got.to_vec(),
        }
    }
}
