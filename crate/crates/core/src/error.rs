use thiserror::Error;

/// Errors raised by the linear-algebra kernels, the manifolds and the optimizers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected:?}, got {found:?}")]
    ShapeMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("index ({i}, {j}) out of range for bound {bound}")]
    IndexOutOfRange { i: usize, j: usize, bound: usize },
    #[error("rotation indices must differ, got i = j = {0}")]
    SameIndex(usize),
    #[error("rotation batch reuses row {0}")]
    OverlappingIndices(usize),
    #[error("matrix is rank deficient (|r_kk| = {pivot:e} at column {column})")]
    RankDeficient { column: usize, pivot: f64 },
    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("Jacobi iteration did not converge in {sweeps} sweeps")]
    NoConvergence { sweeps: usize },
    #[error("singular linear system (pivot {0:e})")]
    Singular(f64),
    #[error("Lyapunov equation has no unique solution (eigenvalue sum {0:e})")]
    SingularLyapunov(f64),
    #[error("invalid coordinate index {index} for {family}")]
    InvalidIndex { family: &'static str, index: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("non-positive entry {value:e} at ({i}, {j})")]
    NonPositive { i: usize, j: usize, value: f64 },
    #[error("no positive root for the 2x2 balancing quadratic (infeasible marginals)")]
    NoPositiveRoot,
    #[error("Sinkhorn balancing did not converge in {iterations} iterations (error {error:e})")]
    SinkhornDiverged { iterations: usize, error: f64 },
    #[error("objective returned a non-finite value at epoch {k}, step {s}")]
    NonFinite { k: usize, s: usize },
    #[error("epoch {k} still failed its health check after {halvings} stepsize halvings")]
    StepsizeExhausted { k: usize, halvings: u32 },
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
