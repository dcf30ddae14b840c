use thiserror::Error;

/// Errors raised anywhere in the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),

    #[error("branch stubs of length {length} overlap each other or the center")]
    StubOverlap { length: f64 },

    #[error("polygon is not symmetric under the {0} reflection")]
    NotSymmetric(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("index caps ({n_max}, {k_max}) too small to certify the first {k} sector eigenvalues")]
    CapsTooSmall { n_max: usize, k_max: usize, k: usize },

    #[error("root finder did not converge: {0}")]
    ConvergenceFailure(String),

    #[error("mesh generation failed: {0}")]
    MeshFailure(String),

    #[error("eigensolver failed: {0}")]
    SolverFailure(String),

    #[error("bound direction mismatch: {0}")]
    DirectionMismatch(String),

    #[error("cannot combine bounds with different directions")]
    MixedDirections,

    #[error("non-positive scaling coefficient {0}")]
    NonPositiveCoeff(f64),

    #[error("enclosure does not contain the domain: {0}")]
    ContainmentViolation(String),

    #[error("discrete-eigenvalue count is unstable: {0}")]
    UnstableCount(String),

    #[error("lower bound exceeds upper bound: {0}")]
    InconsistentBounds(String),

    #[error("no lower-bound pipeline available: {0}")]
    NoPipeline(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
