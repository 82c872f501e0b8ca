use alloc::string::String;

use crate::order::OrderRelation;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("time must be nonnegative, got {0}")]
    NegativeTime(f64),

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),

    #[error("quadrature did not converge (error estimate {estimate:e})")]
    Quadrature { estimate: f64 },

    #[error("relation {0} needs a density, which one of the laws does not provide")]
    UnsupportedRelation(OrderRelation),

    #[error("implication chain violated: {stronger} holds but {weaker} fails ({detail})")]
    ChainViolation {
        stronger: OrderRelation,
        weaker: OrderRelation,
        detail: String,
    },

    #[error("aging certificate failed for shift {shift} at x = {x}: {detail}")]
    CertificateFailed { shift: f64, x: f64, detail: String },

    #[error("internal consistency: {0}")]
    Consistency(String),

    #[error("mean time to failure diverges (1 - P[X1>Y2] P[X2>Y1] = {0:e})")]
    DivergentMttf(f64),

    #[error("step too coarse for the renewal solver; retry with step <= {suggested}")]
    RefineStep { suggested: f64 },

    #[error("transform inversion is ill-conditioned: value {value} at t = {t}")]
    InversionAccuracy { t: f64, value: f64 },

    #[error("polynomial root finder did not converge")]
    RootFinding,

    #[error("not applicable: {0}")]
    NotApplicable(&'static str),

    #[error("invalid system specification: {0}")]
    InvalidSpec(&'static str),

    #[error("non-finite draw from {0}")]
    NonFiniteDraw(&'static str),
}
