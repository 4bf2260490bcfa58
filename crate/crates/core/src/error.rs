use thiserror::Error;

/// Errors produced by the numerical routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("pole: {0}")]
    Pole(String),
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("series did not converge within {terms} terms")]
    NonConvergence { terms: usize },
    #[error("divergent series: {0}")]
    Divergence(String),
    #[error("boundary limit diverges: {0}")]
    LimitDivergence(String),
    #[error("boundary limit did not settle (last estimate {estimate:e})")]
    LimitNotConverged { estimate: f64 },
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("order {requested} exceeds available order {available}")]
    Order { requested: usize, available: usize },
    #[error("unsupported derivative order {order} at x = {x}")]
    UnsupportedOrder { order: usize, x: f64 },
    #[error("degenerate equation: {0}")]
    Degenerate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("non-finite result: {0}")]
    NonFinite(String),
}

impl FracError {
    /// Short stable identifier, used by the CLI in machine-readable error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            FracError::Pole(_) => "pole",
            FracError::Overflow(_) => "overflow",
            FracError::NonConvergence { .. } => "non_convergence",
            FracError::Divergence(_) => "divergence",
            FracError::LimitDivergence(_) => "limit_divergence",
            FracError::LimitNotConverged { .. } => "limit_not_converged",
            FracError::QuadratureNonConvergence(_) => "quadrature_non_convergence",
            FracError::Domain(_) => "domain",
            FracError::Order { .. } => "order",
            FracError::UnsupportedOrder { .. } => "unsupported_order",
            FracError::Degenerate(_) => "degenerate",
            FracError::InvalidParameter(_) => "invalid_parameter",
            FracError::Parse(_) => "parse",
            FracError::NonFinite(_) => "non_finite",
        }
    }

    /// Errors caused by malformed input rather than by the numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            FracError::Parse(_) | FracError::InvalidParameter(_) | FracError::Domain(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, FracError>;
