use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature ran out of refinement levels.
    #[error("quadrature did not converge: estimate {estimate:e}, error bound {error:e}")]
    QuadratureConvergence { estimate: f64, error: f64 },

    /// The integrand produced a non-finite value.
    #[error("integrand not finite at node s = {node:e}")]
    NonFiniteIntegrand { node: f64 },

    /// The adaptive step size collapsed.
    #[error("integration failed at x = {x:e}: {reason}")]
    Integration { x: f64, reason: String },

    /// A bracketing root search could not bracket or converge.
    #[error("root finding failed: {0}")]
    RootFinding(String),

    /// No positive solution exists for the requested parameters.
    #[error("no positive solution: {0}")]
    NoSolution(String),

    /// A constructed solution failed an independent check.
    #[error("verification failed: {what} = {value:e} exceeds {threshold:e}")]
    Verification {
        what: &'static str,
        value: f64,
        threshold: f64,
    },

    /// The φ landscape is not in the large-amplitude regime.
    #[error("R below R*: phi(R, .) not increasing on [{lo:.6}, {hi:.6}]")]
    LandscapeNotMonotone { lo: f64, hi: f64 },

    /// A branch of the φ landscape has more than one extremum.
    #[error("unsupported multi-peak landscape: {0}")]
    MultiPeak(String),

    /// The matching system has no sign change on the climbing path.
    #[error("R too small for lambda: g(0) = {g_start:.9}, g(1) = {g_end:.9}, target {target:.9}")]
    MatchingBracket {
        g_start: f64,
        g_end: f64,
        target: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
