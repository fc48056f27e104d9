use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The ODE integrator could not continue.
    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure { t: f64, reason: String },

    /// A query fell outside the interval covered by a numerical solution.
    #[error("t = {t} outside covered range [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },

    /// An iterative method hit its iteration cap.
    #[error("{what} did not converge after {iterations} iterations")]
    Convergence { what: String, iterations: usize },

    /// A result could be produced but not to the requested accuracy.
    #[error("accuracy error: {0}")]
    Accuracy(String),

    /// The trajectory is not accurate enough to resolve the remainder being
    /// measured.
    #[error(
        "integrator error estimate {estimate:e} at t = {t} exceeds 1% of the order-{n} \
         remainder scale {scale:e}"
    )]
    AccuracyGate {
        n: usize,
        t: f64,
        estimate: f64,
        scale: f64,
    },

    #[error("parse error: {0}")]
    Parse(String),
}
