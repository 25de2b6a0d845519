use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the toolkit can report.
///
/// Singular network conditions are typed so optimizers can penalize a
/// candidate instead of aborting a whole run.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("singular network: {0}")]
    SingularNetwork(&'static str),

    #[error("load reflection cannot be recovered (degenerate S-parameters)")]
    UnrecoverableLoad,

    #[error("no feasible matching solution: {0}")]
    NoFeasibleSolution(&'static str),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("degenerate normalization: feature {feature} is constant")]
    DegenerateNormalization { feature: usize },

    #[error("shape mismatch: expected {expected}, got {actual}")]
    ShapeMismatch { expected: usize, actual: usize },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("empty dataset: {0}")]
    EmptyDataset(&'static str),

    #[error("model file: {0}")]
    ModelFormat(String),

    #[error("dataset file: {0}")]
    DatasetFormat(String),

    #[error("report schema: {0}")]
    ReportSchema(String),

    #[error("surrogate fingerprint mismatch: model expects {expected}, surrogate is {actual}")]
    FingerprintMismatch { expected: String, actual: String },

    #[error("gradient is not finite at iteration {0}")]
    NonFiniteGradient(usize),

    #[error("scenario generation exhausted {0} retries")]
    RetriesExhausted(usize),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// True for the numeric singularities an optimizer should treat as a
    /// bad candidate rather than a fatal failure.
    pub fn is_singular(&self) -> bool {
        matches!(self, Error::SingularNetwork(_) | Error::UnrecoverableLoad)
    }
}
