use thiserror::Error;

/// Errors raised by space construction, spectral calculus and the verifiers.
///
/// Inequality failures are never errors; they are reported through
/// [`crate::report::VerificationReport`].
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution error: ball B({center}, {radius}) has zero volume; the grid is too coarse for that radius")]
    Resolution { center: usize, radius: f64 },

    #[error("degenerate ball: B({center}, {radius}) contains no points")]
    DegenerateBall { center: f64, radius: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error(
        "exactness error: degree {degree} needs at least {required} quadrature nodes, got {nodes}"
    )]
    Exactness {
        degree: usize,
        required: usize,
        nodes: usize,
    },

    #[error("exactness error: truncation tail e^(-beta_N t) = {tail:e} at t = {t} exceeds {tolerance:e}")]
    TruncationTail { t: f64, tail: f64, tolerance: f64 },

    #[error("truncation error: {0}")]
    Truncation(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("unknown check id `{0}`")]
    UnknownCheck(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
