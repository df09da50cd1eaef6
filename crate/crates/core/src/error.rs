use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh generation failed: {0}")]
    Generation(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("invalid material: {0}")]
    Material(String),

    #[error("unknown boundary tag `{0}`")]
    UnknownTag(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("inconsistent operator data: {0}")]
    Internal(String),

    #[error("factorization failed: {0}")]
    Singular(String),

    #[error("unsupported norm: {0}")]
    UnsupportedNorm(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
