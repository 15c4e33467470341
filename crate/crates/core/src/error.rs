use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid needs at least 2 points, got {0}")]
    GridTooSmall(usize),
    #[error("functions live on different grids ({left} vs {right} points)")]
    GridMismatch { left: usize, right: usize },
    #[error("argument {0} outside [0, 1]")]
    OutOfDomain(f64),
    #[error("invalid kernel: {0}")]
    InvalidKernel(String),
    #[error("every eigenvalue was clipped; basis is empty")]
    EmptyBasis,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("not in RKHS: {0}")]
    NotInRkhs(String),
    #[error("grid too coarse: {n} points, need at least {required}")]
    GridTooCoarse { n: usize, required: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("elements do not share a spectral basis")]
    BasisMismatch,
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("no crossing of phi(eps) = n eps^2 in [{lo:e}, {hi:e}]")]
    NoCrossing { lo: f64, hi: f64 },
    #[error("dimension {dim} exceeds the cap of {max}")]
    DimensionCap { dim: usize, max: usize },
    #[error("zero hits at eps = {0:e}; small-ball estimate is a sentinel")]
    ZeroHits(f64),
    #[error("solver did not converge: {0}")]
    NotConverged(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
