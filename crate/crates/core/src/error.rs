use thiserror::Error;

/// Errors raised by the library.
///
/// Variants are split by cause so the CLI can map them onto exit codes:
/// [`Error::Domain`] and friends are numeric-domain problems, [`Error::Io`]
/// and [`Error::Parse`] are input problems.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (max asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("matrix too large: {entries} entries exceeds the limit of {limit}")]
    TooLarge { entries: usize, limit: usize },

    #[error("state is not normalized: norm {0}")]
    NotNormalized(f64),

    #[error("density matrix trace is {0}, expected 1")]
    BadTrace(f64),

    #[error("invalid subsystem selection: {0}")]
    InvalidPartition(String),

    #[error("q = {q} is outside the allowed range {range}")]
    QOutOfRange { q: f64, range: &'static str },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("root finder: {0}")]
    Root(String),

    #[error("failed to parse state file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
