use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice dimensions: {0}")]
    InvalidDimensions(String),
    #[error("unknown site {0}")]
    UnknownSite(String),
    #[error("lattice does not support this operation: {0}")]
    UnsupportedLattice(String),
    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("eigensolver failed at gamma = {gamma}: {reason}")]
    Eigen { gamma: f64, reason: String },
    #[error("momentum at a Dirac point; use the Dirac states instead")]
    DiracPoint,
    #[error("negative dispersion radicand {0:e}")]
    NegativeRadicand(f64),
    #[error("no crossing gap: {0}")]
    NoGap(String),
    #[error("root finding failed: {0}")]
    NoRoot(String),
    #[error("energy {0} too close to a pole of F")]
    PoleProximity(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("ambiguous eigenvector identification: {0}")]
    Ambiguous(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
