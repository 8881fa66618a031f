use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid has {actual} cells, expected {rows} x {cols}")]
    Dimension { rows: usize, cols: usize, actual: usize },

    #[error("duplicate {axis} id `{id}`")]
    DuplicateId { axis: &'static str, id: String },

    #[error("criterion has {actual} values for {expected} examinees")]
    CriterionLength { expected: usize, actual: usize },

    #[error("criterion value for examinee `{examinee}` is not finite")]
    CriterionNotFinite { examinee: String },

    #[error("unknown item `{0}`")]
    UnknownItem(String),

    #[error("statistic is undefined: {0}")]
    Undefined(&'static str),

    #[error("argument out of domain: {0}")]
    Domain(&'static str),

    #[error("sample size {0} is too small (need at least 4)")]
    SampleSize(usize),

    #[error("invalid item format: {0}")]
    InvalidFormat(&'static str),

    #[error("no format configured for item `{0}`")]
    MissingFormat(String),

    #[error("extreme scores have no finite ability estimate: {}", .0.join(", "))]
    ExtremeScores(Vec<String>),

    #[error("items answered all correct or all incorrect cannot be calibrated: {}", .0.join(", "))]
    ExtremeItems(Vec<String>),
}

pub type Result<T> = core::result::Result<T, Error>;
