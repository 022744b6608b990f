use thiserror::Error;

use crate::lp::LpError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed network, route, or indexing structure.
    #[error("structural error: {0}")]
    Structural(String),

    /// A value violates a documented domain constraint (negative demand,
    /// non-positive VOT, toll outside its support, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("od pair {origin}->{destination} has positive demand but no route")]
    InfeasibleDemand { origin: String, destination: String },

    #[error("solver did not converge after {iterations} iterations (last relative gap {gap:e})")]
    NonConvergence { iterations: usize, gap: f64 },

    #[error(transparent)]
    Lp(#[from] LpError),

    /// An error raised inside a named stage of a multi-step pipeline.
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Strips any stage wrappers and returns the underlying error.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| Error::Stage {
            stage,
            source: Box::new(e),
        })
    }
}
