use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("size mismatch: expected {expected}, found {found}")]
    SizeMismatch { expected: usize, found: usize },
    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),
    #[error("order moves column {column} outside its supernode")]
    NotBoundaryPreserving { column: usize },
    #[error("supernode {child} is not a child of supernode {parent}")]
    NotChildParent { child: usize, parent: usize },
    #[error("refinement set is empty or not contained in the supernode")]
    InvalidRefinement,
    #[error("instance of size {size} exceeds the exhaustive-search limit {limit}")]
    TooLarge { size: usize, limit: usize },
    #[error("matrix is not positive definite: non-positive pivot at column {column}")]
    NotPositiveDefinite { column: usize },
    #[error("entry ({row}, {col}) lies outside the symbolic structure")]
    Structural { row: usize, col: usize },
    #[error("factor storage has not been factorized")]
    NotFactorized,
    #[error("matrix has no numerical values")]
    MissingValues,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
