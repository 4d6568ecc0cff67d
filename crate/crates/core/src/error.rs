use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("outside the domain: {0}")]
    Domain(String),

    #[error("t = {t} is not before the blow-up time T = {final_time}")]
    BlowUpTime { t: f64, final_time: f64 },

    /// Subdivision budget exhausted; `estimate` is the best value reached.
    #[error(
        "quadrature did not converge after {subdivisions} subdivisions \
         (estimate {estimate:e}, error estimate {error_estimate:e})"
    )]
    Convergence {
        estimate: f64,
        error_estimate: f64,
        subdivisions: usize,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("resolution limit: {0}")]
    Resolution(String),
}
