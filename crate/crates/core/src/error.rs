use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition was violated; the string names it.
    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("instability at t = {t}: {reason}")]
    Instability { t: f64, reason: String },

    #[error("trajectory is missing steps inside [{t1}, {t2}]: {detail}")]
    MissingSteps { t1: f64, t2: f64, detail: String },

    #[error("step size too large at t = {t}: {detail}")]
    StepSize { t: f64, detail: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid snapshot {path}: {reason}")]
    Snapshot { path: String, reason: String },

    #[error("configuration epsilon = {epsilon}, n = {n}: {source}")]
    InConfig {
        epsilon: f64,
        n: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Precondition(_) => "precondition",
            Error::GridMismatch(_) => "grid_mismatch",
            Error::NonFinite(_) => "non_finite",
            Error::Instability { .. } => "instability",
            Error::MissingSteps { .. } => "missing_steps",
            Error::StepSize { .. } => "step_size",
            Error::Parse { .. } => "parse",
            Error::Snapshot { .. } => "snapshot",
            Error::InConfig { source, .. } => source.kind(),
            Error::Io(_) => "io",
            Error::Serialize(_) => "serialize",
        }
    }
}
