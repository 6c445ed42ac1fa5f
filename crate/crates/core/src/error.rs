use thiserror::Error;

/// Failure modes shared by every evaluation path.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PcfError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("({a}, {x}) lies outside the series window")]
    Window { a: f64, x: f64 },

    #[error("quadrature did not converge (error estimate {err_estimate:e} after {evaluations} evaluations)")]
    Convergence {
        err_estimate: f64,
        evaluations: usize,
    },

    #[error("integrand produced NaN at parameter {at}")]
    IntegrandNan { at: f64 },

    #[error("contour trace failed (worst residual {worst_residual:e})")]
    Trace { worst_residual: f64 },

    #[error("value exceeds the double range (ln|value| = {ln_abs}); request scaled output")]
    Overflow { ln_abs: f64 },
}

impl PcfError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        PcfError::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, PcfError>;
