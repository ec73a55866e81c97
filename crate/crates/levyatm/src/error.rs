//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    /// An adaptive quadrature failed to reach the requested tolerance.
    #[error("quadrature failure: {0}")]
    QuadratureFailure(String),

    /// A tail integral keeps growing window after window; the underlying
    /// integral does not exist.
    #[error("divergent integral: {0}")]
    DivergentIntegral(String),

    /// The characteristic exponent was requested outside the strip of
    /// analyticity Im(u) in [-1, 0].
    #[error("argument outside analyticity strip: Im(u) = {0}")]
    StripViolation(f64),

    /// An exponential-moment condition required by the operation fails.
    #[error("moment condition violated: {0}")]
    MomentFailure(String),

    /// A jump density failed the basic Levy integrability requirement.
    #[error("not a Levy density: {0}")]
    InvalidDensity(String),

    /// A probe/evaluation grid is malformed (empty, non-positive, not sorted).
    #[error("bad grid: {0}")]
    GridError(String),

    /// Tail values do not decrease where a tail function is required.
    #[error("tail is not monotone: {0}")]
    NonMonotoneTail(String),

    /// A fit or scan range is degenerate (empty, inverted, or all-zero data).
    #[error("degenerate range: {0}")]
    DegenerateRange(String),

    /// Root bracketing failed: no sign change over the search interval.
    #[error("bracket failure: {0}")]
    BracketFailure(String),

    /// Scalar argument outside the mathematical domain of the routine.
    #[error("domain error: {0}")]
    DomainError(String),

    /// The jump tail vanishes where the operation needs it (e.g. a pure
    /// Gaussian model passed to a jump-scaling routine).
    #[error("degenerate tail: {0}")]
    TailDegenerate(String),

    /// Operation got a model under the wrong measure tag.
    #[error("measure tag mismatch: {0}")]
    MeasureTagError(String),

    /// A call price outside [0, 1) cannot be inverted to a volatility.
    #[error("price out of range: {0}")]
    PriceOutOfRange(f64),

    /// Stability index outside (1, 2].
    #[error("alpha out of range: {0}")]
    AlphaDomain(f64),

    /// Asymptotic prediction requested while assumption checks fail.
    #[error("assumption violated: {0}")]
    AssumptionViolation(String),

    /// Inputs violate a documented precondition of the check.
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    /// A scanned tail is identically zero over the requested range.
    #[error("tail vanished: {0}")]
    TailVanished(String),

    /// An integral that must converge was detected to diverge numerically.
    #[error("divergence detected: {0}")]
    DivergenceDetected(String),

    /// Monte Carlo budget exhausted before the requested accuracy.
    #[error("simulation budget exceeded: {0}")]
    SimulationBudgetExceeded(String),

    /// Configuration (JSON or CLI) is invalid.
    #[error("config error: {0}")]
    ConfigError(String),
}
