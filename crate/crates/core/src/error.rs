use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("arclength {s} outside frame domain [0, {length}]")]
    OutOfDomain { s: f64, length: f64 },
    #[error("inward offset by {0} m leaves an empty polygon")]
    EmptyOffset(f64),
    #[error("spatial model singular at interval {index} (e_y * kappa >= 1)")]
    ModelSingularity { index: usize },
    #[error("reference curvature at interval {index} needs steering beyond the limit")]
    InfeasibleReference { index: usize },
    #[error("corner cannot be handled by the 5-point reference: {0}")]
    FallbackDubinsCorner(String),
    #[error("smoothed segment endpoints are {gap:.3} m away from the path")]
    StitchMismatch { gap: f64 },
    #[error("linear program is {0}")]
    LpFailed(&'static str),
    #[error("invalid linear program: {0}")]
    InvalidLp(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
