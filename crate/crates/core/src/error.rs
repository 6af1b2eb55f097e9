use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("p = {0} is not an odd prime")]
    InvalidPrime(u32),

    #[error("invalid element x^{alpha} y^{beta} for p = {p}")]
    InvalidElement { alpha: u32, beta: u8, p: u32 },

    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("unknown partition {0:?} (expected rotation-coset, z6-index3 or z6-index2)")]
    UnknownPartition(String),

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("enumeration of {size} items exceeds the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("window of {window} digits exceeds message length {k} without tail-biting")]
    WindowTooLong { window: usize, k: usize },

    #[error("group order {0} is not supported here (only D6, p = 3)")]
    UnsupportedOrder(u32),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("unknown builtin channel {0:?}")]
    UnknownChannel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("the two messages are equal; the collision probability is only defined for distinct messages")]
    EqualMessages,

    #[error("alpha = {alpha} is below the validity threshold |1 - 2p| = {threshold}")]
    InvalidAlpha { alpha: f64, threshold: f64 },

    #[error("the constraint set is infeasible: {0}")]
    Infeasible(String),

    #[error("no threshold found below the search cap {cap}: {claim}")]
    ThresholdNotFound { claim: &'static str, cap: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;
