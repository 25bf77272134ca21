use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("non-finite input: component {index} is {value}")]
    NonFiniteInput { index: usize, value: f64 },

    /// The right-hand side (or a derived field) returned NaN/Inf.
    #[error("evaluation produced non-finite component {component} at t = {t}")]
    Evaluation { component: usize, t: f64 },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("construction error: {message} (witness {witness:?})")]
    Construction { message: String, witness: Vec<f64> },

    #[error("inconsistent viable pair: {message} (witness {witness:?})")]
    InconsistentPair { message: String, witness: Vec<f64> },

    #[error("event localization failed on surface {surface}: bracket [{lo}, {hi}] after {iterations} bisections")]
    EventLocalization {
        surface: usize,
        lo: f64,
        hi: f64,
        iterations: usize,
    },

    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },

    #[error("scenario error: {0}")]
    Scenario(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
