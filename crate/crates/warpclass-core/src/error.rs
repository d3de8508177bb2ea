//! Shared error type for the whole crate.

use thiserror::Error;

/// Everything that can go wrong in this crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A constructor argument was outside its admissible range.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Evaluation was requested outside the warping function's domain.
    #[error("radius {t} outside domain [0, {domain_end}]")]
    OutOfDomain { t: f64, domain_end: f64 },

    /// An integrand produced a NaN or infinity at an interior node.
    #[error("non-finite integrand value {value} at t = {at}")]
    NonFinite { at: f64, value: f64 },

    /// The improper-integral classifier requires nonnegative integrands.
    #[error("negative integrand value {value} at t = {at}; classifier requires f >= 0")]
    NegativeIntegrand { at: f64, value: f64 },

    /// Adaptive quadrature ran out of subdivisions before reaching tolerance.
    #[error("subdivision budget exhausted; best estimate {estimate} +/- {error_estimate}")]
    AccuracyBudget { estimate: f64, error_estimate: f64 },

    /// An operation's stated precondition does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A report-level cross-check failed; indicates numerics inconsistent
    /// enough that no classification should be trusted.
    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    /// Generic evaluation failure with location.
    #[error("evaluation failed at t = {at}: {reason}")]
    Eval { at: f64, reason: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
