use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid {what}: {msg}")]
    Invalid { what: &'static str, msg: String },

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("simulation aborted at t = {t:.4} s: {msg}")]
    NonFinite { t: f64, msg: String },

    #[error("unknown report format `{0}` (expected csv, table or grid)")]
    UnknownFormat(String),

    #[error("cannot emit a report without rows")]
    EmptyReport,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, msg: impl Into<String>) -> Self {
        Error::Invalid { what, msg: msg.into() }
    }
}
