use thiserror::Error;

use crate::family::ComplexityFamily;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate design for {0}: all transformed sizes are equal")]
    FitDegenerate(ComplexityFamily),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("target `{target}` failed at sample size {size}: {message}")]
    Target {
        target: String,
        size: usize,
        message: String,
    },

    #[error("cannot read dataset {path}: {message}")]
    Ingest { path: String, message: String },

    #[error("nothing to plot: {0}")]
    EmptyPlot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the caller's inputs rather than by the target or the
    /// environment. The CLI maps these to exit status 2.
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::Config(_) | Error::Precondition(_) | Error::Ingest { .. } | Error::Domain(_)
        )
    }
}
