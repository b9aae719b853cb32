use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole of the gamma function at x = {x}")]
    Pole { x: f64 },

    #[error("gamma({x}) overflows f64")]
    Overflow { x: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series did not converge within {terms} terms")]
    Convergence { terms: usize },

    #[error("adaptive quadrature on [{lo}, {hi}] exceeded depth {depth} (error estimate {err:e})")]
    DepthExceeded {
        lo: f64,
        hi: f64,
        depth: usize,
        err: f64,
    },

    #[error("integrand is not finite at x = {x}")]
    NonFiniteIntegrand { x: f64 },

    #[error("fractional order alpha = {alpha} is too close to 1 for the Mittag-Leffler kernel (limit 0.99)")]
    DegenerateOrder { alpha: f64 },

    #[error("derivative is singular at t = {t}")]
    Singularity { t: f64 },

    #[error("fixed-point iteration diverged after {iterations} iterations (last change {last_change:e})")]
    Divergence { iterations: usize, last_change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
