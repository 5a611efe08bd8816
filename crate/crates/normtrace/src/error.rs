use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to print a usable
/// diagnostic without holding references into field structures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("invalid field parameters: {0}")]
    InvalidParameter(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("element level mismatch: expected {expected}, got {got}")]
    LevelMismatch { expected: &'static str, got: &'static str },

    #[error("argument must be nonzero")]
    ZeroArgument,

    #[error("enumeration size {size} exceeds cap {cap}")]
    ScaleExceeded { size: u128, cap: u128 },

    #[error("curve coefficient alpha must be nonzero")]
    ZeroAlpha,

    #[error("torus parameter u must be nonzero")]
    ZeroU,

    #[error("operation requires a nontrivial multiplicative character")]
    TrivialCharacter,

    #[error("rounding residual {residual:e} exceeds tolerance {tolerance:e}")]
    RoundingTooLarge { residual: f64, tolerance: f64 },

    #[error("character-sum identity produced a non-integer value (residual {residual:e})")]
    NonIntegerResult { residual: f64 },

    #[error("exact division failed: {value} is not divisible by {divisor}")]
    DivisibilityViolation { value: String, divisor: String },

    #[error("formula requires odd characteristic")]
    EvenCharacteristic,
}

pub type Result<T> = std::result::Result<T, Error>;
