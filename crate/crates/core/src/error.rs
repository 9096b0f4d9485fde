use thiserror::Error;

use crate::fw::FwResult;

pub type Result<T, E = CatError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CatError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("truncation inadequate: {what} needs n_cut >= {required}, have {available}")]
    Truncation {
        what: String,
        required: usize,
        available: usize,
    },

    #[error("odd cat state is undefined for |alpha| = {0:e}")]
    DegenerateCat(f64),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("operator is not Hermitian (residual {0:e})")]
    NotHermitian(f64),

    #[error("state invariant violated: {0}")]
    InvalidState(String),

    #[error("optimization failed: {0}")]
    OptimizationFailure(String),

    #[error("Gaussian minimum {0:e} is too small to normalize by")]
    DegenerateDenominator(f64),

    #[error("Kraus set incomplete: completeness residual {0:e}")]
    KrausIncomplete(f64),

    #[error("phase quadrature under-resolved: doubling nodes moved a witness value by {0:e}")]
    QuadratureUnderresolved(f64),

    #[error("grading operator is not an involution (residual {0:e})")]
    NotInvolution(f64),

    #[error("Hamiltonian is not graded: {0}")]
    NotGraded(String),

    #[error("mass must be strictly positive, got {0}")]
    ZeroMass(f64),

    #[error("block diagonalization did not converge after {} iterations", .0.generator_log.len())]
    NoConvergence(Box<FwResult>),

    #[error("series diverges for |p| = {p} >= m = {m}")]
    DivergentRegime { p: f64, m: f64 },

    #[error("no revival with height >= {threshold} found in [{start}, {end}]")]
    NoRevivalFound { threshold: f64, start: f64, end: f64 },

    #[error("sampling aliases frequency {frequency}: Nyquist is {nyquist}")]
    AliasedSampling { frequency: f64, nyquist: f64 },

    #[error("invalid spin {0}: 2s must be a non-negative integer")]
    InvalidSpin(f64),
}

impl CatError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        CatError::InvalidParameter(msg.into())
    }
}
