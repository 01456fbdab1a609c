use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is singular to working precision (pivot {pivot:e} at column {column})")]
    SingularMatrix { column: usize, pivot: f64 },

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid hopping profile: {0}")]
    InvalidHopping(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("potential violates the dominance condition (margin {margin:e}); pass an override to proceed")]
    ConditionViolated { margin: f64 },

    #[error("Neumann series does not contract (q = {q})")]
    ContractionFailure { q: f64 },

    #[error("spectrum not strictly positive (min eigenvalue {min_eigenvalue:e}) in a regime where it must be")]
    NonPositiveSpectrum { min_eigenvalue: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("structure check failed: {0}")]
    StructureCheck(String),

    #[error("invalid ensemble spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = std::result::Result<T, Error>;
