use thiserror::Error;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("element count mismatch: expected {expected}, found {found}")]
    ElementCountMismatch { expected: usize, found: usize },

    #[error("invalid permutation {perm:?} for a rank-{rank} tensor")]
    InvalidPermutation { perm: Vec<usize>, rank: usize },

    #[error("invalid axis {axis} for a rank-{rank} tensor")]
    InvalidAxis { axis: usize, rank: usize },

    #[error("extent mismatch on contracted axes: {left} vs {right}")]
    ExtentMismatch { left: usize, right: usize },

    #[error("operation not supported for rank {0}")]
    RankUnsupported(usize),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("all singular values are zero")]
    AllZero,

    #[error("state vector has length {found}, expected {expected}")]
    BadLength { expected: usize, found: usize },

    #[error("state is not normalized (norm {0:.12})")]
    NotNormalized(f64),

    #[error("dimension {dim} exceeds the limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("site indices must satisfy i < j (got {i}, {j})")]
    BadOrder { i: usize, j: usize },

    #[error("matrix is singular or too ill-conditioned to invert")]
    Singular,

    #[error("bond dimension too small for a transfer-matrix analysis")]
    BondTooSmall,

    #[error("model needs at least {min} sites, got {n}")]
    TooFewSites { n: usize, min: usize },

    #[error("correlation length xi must be positive and finite (got {0})")]
    BadXi(f64),

    #[error("inverse temperature must be non-negative and finite (got {0})")]
    BadBeta(f64),

    #[error("model {0} has no nearest-neighbour gate decomposition")]
    UnsupportedModel(&'static str),

    #[error("no convergence after {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("site index {index} out of range for {len} sites")]
    SiteOutOfRange { index: usize, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
