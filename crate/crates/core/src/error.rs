use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("gram matrix is not symmetric")]
    NotSymmetric,
    #[error("degenerate quadratic form")]
    DegenerateForm,
    #[error("cannot parse lattice spec {0:?}")]
    LatticeSpec(String),
    #[error("cannot parse plane spec {0:?}")]
    PlaneSpec(String),
    #[error("plane is not positive definite")]
    NotPositiveDefinite,
    #[error("plane has dimension {got} but the form has {expected} positive directions")]
    PlaneDimension { expected: usize, got: usize },
    #[error("no positive plane found after {0} attempts")]
    PlaneSampling(usize),
    #[error("vector is not isotropic (Q(v) = {0})")]
    NotIsotropic(i128),
    #[error("pairing between e and e' vanishes")]
    DegeneratePairing,
    #[error("majorant is not positive definite (non-generic or wrongly sized plane)")]
    MajorantNotDefinite,
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("matrix does not preserve the form (residual {0:e})")]
    NotInGroup(f64),
    #[error("numerical degeneracy (condition estimate {0:e})")]
    NumericalDegeneracy(f64),
    #[error("quadrature did not converge: refinements differ by {0:e}")]
    NonConvergence(f64),
    #[error("exponents are parallel; no balancing rate exists")]
    ParallelExponents,
    #[error("balancing rate {0} is negative; terms are mis-ordered")]
    NegativeRate(String),
    #[error("p(pi) not tabulated for SO({p},{q})")]
    NotTabulated { p: u32, q: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
