use thiserror::Error;

/// Errors across the certified pipeline. Every variant corresponds to a
/// condition under which a result can *not* be certified; there is no
/// "best effort" fallback anywhere.
#[derive(Debug, Error)]
pub enum Error {
    /// Argument outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature exhausted its depth budget before reaching the
    /// requested tolerance.
    #[error("quadrature did not converge: {0}")]
    NonConvergence(String),

    /// The asymptotic series does not start decreasing at this argument, so
    /// no truncation can be certified.
    #[error("asymptotic series diverges at this argument (first term not decreasing)")]
    DivergenceAtArgument,

    /// Bisection cannot certify opposite signs at the bracket endpoints.
    #[error("no certified sign change on the bracket: {0}")]
    NoSignChange(String),

    /// The argument was supplied only as u = log x but the operation needs
    /// the x-scaled form, which is meaningless at this magnitude.
    #[error("refusing x-scaled evaluation at u = {0}; stay in u-space")]
    OverflowRefusal(String),

    /// The monotone tail certificate of the envelope scan failed.
    #[error("tail of the envelope scan could not be bounded: {0}")]
    TailUnbounded(String),

    /// The certified threshold exceeds the anchor e·x₁, so the theorem is
    /// not certified at exp(u₁ + 1).
    #[error("certified threshold {threshold} exceeds the anchor {anchor}")]
    ThresholdAboveAnchor { threshold: String, anchor: String },

    /// The enclosure of x/α straddles an integer, so ⌊x/α⌋ cannot be
    /// decided at the working precision.
    #[error("enclosure of x/alpha straddles an integer at x = {0}")]
    UndecidedFloor(u64),

    /// A sieve request exceeds the configured ceiling.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// Malformed checkpoint or certificate document.
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
