use thiserror::Error;

use crate::geometry::Manifold;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A point failed its manifold validator.
    #[error("invalid {manifold} point: {reason}")]
    InvalidPoint { manifold: Manifold, reason: String },

    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch { expected: Vec<usize>, got: Vec<usize> },

    #[error("kernel family `{family}` is not defined on {manifold} points")]
    ManifoldMismatch { family: &'static str, manifold: Manifold },

    #[error("invalid kernel specification: {0}")]
    InvalidKernel(String),

    #[error("invalid lag window: {0}")]
    InvalidWindow(String),

    /// The empirically centered features vanish, so no ESS is defined.
    #[error("zero feature variance (gamma0 = {gamma0:e})")]
    ZeroFeatureVariance { gamma0: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("line {line}: {reason}")]
    ChainFile { line: usize, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn point(manifold: Manifold, reason: impl Into<String>) -> Self {
        Error::InvalidPoint { manifold, reason: reason.into() }
    }

    /// True for errors caused by rejected user input rather than I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}
