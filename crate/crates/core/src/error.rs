use std::path::PathBuf;

use thiserror::Error;

use crate::normalform::QuartetKey;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("dimension mismatch: expected length {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("integration blew up at t = {t}: max |q| = {max_q}")]
    BlowUp { t: f64, max_q: f64 },

    #[error("non-resonance violated for {key:?}: |denominator| = {denominator:e}")]
    NonResonance { key: QuartetKey, denominator: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal consistency error: {0}")]
    Consistency(String),

    #[error("degenerate ratio denominator: S2 mean = {s2:e}")]
    DegenerateDenominator { s2: f64 },

    #[error("observer aborted the run at t = {t}: {message}")]
    Observer { t: f64, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
