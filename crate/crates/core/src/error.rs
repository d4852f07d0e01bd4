use std::io;
use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("element {value} is not a member of GF({order})")]
    ElementOutOfRange { value: u16, order: u16 },

    #[error("field mismatch: GF({left}) and GF({right})")]
    FieldMismatch { left: u16, right: u16 },

    #[error("division by zero")]
    DivisionByZero,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular (determinant is zero)")]
    Singular,

    #[error("expected a rank-1 matrix, found rank {0}")]
    NotRankOne(usize),

    #[error("invalid code parameters: {0}")]
    InvalidParams(String),

    #[error("invalid node subset: {0}")]
    InvalidSubset(String),

    #[error("inconsistent segments: {0}")]
    Inconsistent(String),

    #[error("alignment condition failed: {0}")]
    Alignment(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("storage error: {0}")]
    Store(String),

    #[error("nodes {failed:?} are failed; optimal repair needs the other four nodes healthy, use reconstruct instead")]
    TooManyFailures { failed: Vec<u8> },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
