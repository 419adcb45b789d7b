use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error("module relation fails: {0}")]
    Relation(String),
    #[error("not reduced: {0}; split off free summands first")]
    NotReduced(String),
    #[error("sequence is not exact: {0}")]
    NotExact(String),
    #[error("sequence is not split over the exterior algebra on the Bockstein: {0}")]
    NotSplit(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("window too narrow: {0}")]
    Window(String),
    #[error("unknown {what}: {name}")]
    Unknown { what: &'static str, name: String },
}

pub type Result<T> = std::result::Result<T, Error>;
