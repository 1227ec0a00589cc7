use thiserror::Error;

use crate::jets::ComplexPoint;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite function value {value} at stencil point {point}")]
    NonFiniteEvaluation { point: ComplexPoint, value: f64 },

    #[error("derivative order {requested} exceeds the supported order {supported}")]
    UnsupportedOrder { requested: usize, supported: usize },

    #[error("metric is not positive definite at {0}")]
    DegenerateMetric(ComplexPoint),

    #[error("point {point} lies outside the {domain} domain")]
    OutsideDomain { domain: String, point: ComplexPoint },

    #[error("singular evaluation: {0}")]
    Singular(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{operation} is not supported on {domain}")]
    UnsupportedDomain { operation: &'static str, domain: String },

    #[error("point {0} is not on the polydisc slice")]
    OffSlice(ComplexPoint),

    #[error("Ricci normalizations differ: {0} vs {1}")]
    NormalizationMismatch(f64, f64),

    #[error("potential is not Kähler–Einstein with Ricci constant {ricci}: residual {residual:e}")]
    NotEinstein { ricci: f64, residual: f64 },

    #[error("gradient length is not constant: deviation {deviation:e} exceeds {tolerance:e}")]
    NotConstantLength { deviation: f64, tolerance: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("trajectory left the domain at t = {time}")]
    LeftDomain { time: f64 },

    #[error("shooting bracket [{lo}, {hi}] does not straddle the boundary (blow-up at {t_lo} and {t_hi})")]
    Bracketing { lo: f64, hi: f64, t_lo: f64, t_hi: f64 },

    #[error("insufficient grid resolution: {0}")]
    Resolution(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
