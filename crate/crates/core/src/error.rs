use thiserror::Error;

use crate::quadrature::QuadratureError;

pub type Result<T, E = PhaseError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum PhaseError {
    #[error("domain error: {what} (got {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{what} did not converge within {reached} terms")]
    NonConvergence { what: &'static str, reached: usize },

    #[error("refused: {0}")]
    Refused(String),

    #[error("fidelity is zero, the Holevo variance is infinite")]
    InfiniteVariance,

    #[error("quadrature failed: {0}")]
    Quadrature(#[from] QuadratureError),

    #[error("ill-conditioned fit: {0}")]
    IllConditioned(String),

    #[error("scan point N = {copies}, n = {n}: {source}")]
    ScanPoint {
        copies: u32,
        n: f64,
        #[source]
        source: Box<PhaseError>,
    },
}

impl PhaseError {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        PhaseError::Domain { what, value }
    }
}
