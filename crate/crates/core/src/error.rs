use thiserror::Error;

/// Errors raised by domain construction, assembly, counting and the estimators.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("grid is not integral: {0}")]
    NonIntegralGrid(String),
    #[error("puncture closure is not interior to the outer box: {0}")]
    PunctureNotInterior(String),
    #[error("unsupported dimension {0} (expected 1 or 2)")]
    UnsupportedDimension(usize),
    #[error("missing coupling constant for lattice point {0:?}")]
    MissingCoupling([i64; 2]),
    #[error("covering condition violated: C_minus = {0}")]
    CoveringViolated(f64),
    #[error("invalid single-site density: {0}")]
    InvalidDensity(String),
    #[error("factorization failed at E = {energy} after {attempts} jitter retries")]
    FactorizationFailed { energy: f64, attempts: usize },
    #[error("dimension {dim} exceeds dense threshold {threshold}")]
    DimensionTooLarge { dim: usize, threshold: usize },
    #[error("geometry mismatch: {0}")]
    GeometryMismatch(String),
    #[error("assumption violated: {0}")]
    AssumptionViolated(String),
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),
    #[error("invalid delta {0}: need 0 < delta < 1/4")]
    InvalidDelta(f64),
    #[error("shift {0} lies in the spectrum; resolvent undefined")]
    SingularShift(f64),
    #[error("linear solve failed: {0}")]
    SolveFailed(String),
    #[error("energy {energy} is not below the spectrum floor {floor}")]
    EnergyInSpectrum { energy: f64, floor: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
