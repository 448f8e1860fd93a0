use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid cyclotomic level {0}")]
    InvalidLevel(u64),
    #[error("exponent {0} is not integral at level {1}")]
    LevelMismatch(String, u64),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("empty polyhedron")]
    EmptyPolyhedron,
    #[error("unbounded polyhedron: {0}")]
    Unbounded(String),
    #[error("sublattice is not saturated; saturate it first")]
    NotSaturated,
    #[error("cone is not pointed")]
    NotPointed,
    #[error("non-integral shift: {0}")]
    NonIntegral(String),
    #[error("map is not proper on the support: recession direction {0}")]
    Improper(String),
    #[error("reconstruction failed at {0}")]
    ReconstructionFailed(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
