use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("row {row}: expected {expected} fields, found {found}")]
    Structural { row: u64, expected: usize, found: usize },

    #[error("unknown cell token `{token}` at examinee `{examinee}`, item `{item}`")]
    Token { examinee: String, item: String, token: String },

    #[error("criterion value `{value}` for examinee `{examinee}` is not a number")]
    Criterion { examinee: String, value: String },

    #[error("response file has no header row")]
    MissingHeader,

    #[error("format for item `{item}`: {reason}")]
    Format { item: String, reason: String },

    #[error("{0}")]
    Usage(String),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Analysis(#[from] testgauge_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
