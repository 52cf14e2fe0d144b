use thiserror::Error;

/// Errors raised by the simulator library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: at least one Fock level is required")]
    InvalidDimension(usize),

    #[error("Fock index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("matrix is not Hermitian (asymmetry {0:e})")]
    NonHermitian(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("superoperator couples different offsets (leak {0:e})")]
    NotOffsetPreserving(f64),

    #[error("superoperator is not diagonal in the matrix-unit basis (leak {0:e})")]
    NotDiagonal(f64),

    #[error("degenerate parameters: Γ² + Δ² must be positive")]
    DegenerateParams,

    #[error("invalid parameter {name}: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("not a density matrix: {0}")]
    InvalidDensity(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("matrix exponential failed: {0}")]
    ExpmFailure(String),

    #[error("strong-relaxation solver needs γ_eg > 0")]
    ZeroGammaEg,

    #[error("quadrature needs an even number of panels >= 8, got {0}")]
    InvalidQuadSteps(usize),

    #[error("quadrature not converged: step-halving estimate {estimate:e} exceeds {tolerance:e}")]
    QuadratureNotConverged { estimate: f64, tolerance: f64 },

    #[error("time grid must start at 0 and be strictly increasing")]
    InvalidGrid,

    #[error("trace drift {0:e} exceeds the integration budget")]
    StepTooLarge(f64),

    #[error("non-physical probability {0}")]
    NonPhysicalProbability(f64),

    #[error("detection branch has vanishing probability {0:e}")]
    ZeroProbabilityBranch(f64),

    #[error("conditional state has eigenvalue {0:e} below the clamp tolerance")]
    NonPhysicalState(f64),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
