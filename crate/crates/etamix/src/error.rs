//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by law construction and mixing computations.
///
/// Validation findings are *not* errors — see
/// [`crate::model::Violation`] — because a model that fails validation
/// is data to report, not a failure of the library itself.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must share an index set do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A requested table or enumeration would exceed the size guard.
    ///
    /// The message names the offending exponent so the caller can see
    /// exactly which product blew the budget.
    #[error("size guard exceeded: {what} needs {needed} entries ({base}^{exponent}), cap is {cap}")]
    SizeGuardExceeded {
        what: &'static str,
        base: usize,
        exponent: u32,
        needed: u128,
        cap: usize,
    },

    /// Conditioning event has probability zero; the conditional law is
    /// undefined. Callers that enumerate conditioning tuples catch this
    /// and skip the tuple.
    #[error("zero-probability prefix: {0}")]
    ZeroProbabilityPrefix(String),

    /// A position or symbol index is outside its valid range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    /// Power iteration hit its iteration cap before the Rayleigh
    /// estimates stabilized.
    #[error("power iteration did not converge after {iterations} iterations (last two estimates: {previous}, {last})")]
    NonConvergence {
        iterations: usize,
        previous: f64,
        last: f64,
    },

    /// A vector required to be balanced (entries summing to zero) is not.
    #[error("unbalanced input vector: entry sum {sum:e} exceeds tolerance {tolerance:e}")]
    UnbalancedInput { sum: f64, tolerance: f64 },

    /// Contracting-case closed forms require theta < 1.
    #[error("contraction coefficient {0} is not < 1; closed-form norm bounds do not apply")]
    ThetaNotContracting(f64),

    /// A model failed validation where a valid one was required.
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// Input (config file, function spec, flag value) could not be used.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;
