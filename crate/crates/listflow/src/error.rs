//! Error taxonomy shared across the crate.
//!
//! Numerical failures (collapse, stability, blow-up, lost positivity) are
//! kept distinct from configuration mistakes so the CLI can map them to
//! different exit codes.

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A metric coefficient is zero, negative, or below the collapse guard.
    #[error("metric is not positive at t = {t}: min coefficient {min_value:e}")]
    NonPositiveMetric { t: f64, min_value: f64 },

    /// Requested time step exceeds the diffusive stability bound.
    #[error("dt = {dt:e} exceeds the stability bound {bound:e} at t = {t}")]
    StabilityViolation { t: f64, dt: f64, bound: f64 },

    /// The comparison ODE solution ceased to exist before the requested time.
    #[error("comparison bound blows up before t = {t}: denominator {denominator:e}")]
    BoundBlowup { t: f64, denominator: f64 },

    /// Conjugate weight lost positivity during the backward pass.
    #[error("conjugate weight lost positivity at t = {t} (min w = {min_w:e})")]
    NonPositiveWeight { t: f64, min_w: f64 },

    /// τ must stay positive for the pointed entropy.
    #[error("tau = {tau:e} is not positive")]
    NonPositiveTau { tau: f64 },

    /// The operation needs a trajectory stored at every step.
    #[error("trajectory stored with stride {stride}; this operation needs stride 1")]
    StrideError { stride: usize },

    /// The implicit-shift eigenvalue iteration stalled.
    #[error("eigenvalue iteration for row {row} did not converge after {iterations} shifts")]
    NoConvergence { row: usize, iterations: usize },

    /// A field expected to have nonzero content is numerically zero.
    #[error("spectrum is numerically zero; no nonzero eigenvalue to select")]
    AllZero,

    /// Malformed configuration or command line.
    #[error("usage: {0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    /// 2 for usage problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) | Error::Io(_) => 2,
            _ => 3,
        }
    }
}
