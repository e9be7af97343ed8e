use thiserror::Error;

/// Errors produced by the coders, the balancing loops and configuration checks.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("InvalidProbability: p_L = {p_low} is not inside (1/2, 1); n = {n} is too small for this alpha")]
    InvalidProbability { n: usize, p_low: String },

    #[error(
        "InsufficientCompression: worst-case interval for the {branch} branch (statistic {statistic}) \
         is shorter than q^-{target_len}"
    )]
    InsufficientCompression {
        branch: &'static str,
        statistic: usize,
        target_len: usize,
    },

    #[error("unsupported alphabet size q = {q} for mode {mode}")]
    UnsupportedAlphabet { q: u8, mode: &'static str },

    #[error("codeword length n = {n} is too short for mode {mode}")]
    LengthTooShort { n: usize, mode: &'static str },

    #[error("invalid alpha^2: {0}")]
    InvalidAlpha(String),

    #[error("expected a sequence of length {expected}, got {actual}")]
    WrongLength { expected: usize, actual: usize },

    #[error("symbol {symbol} at position {position} is outside the alphabet of size {q}")]
    InvalidSymbol { symbol: u32, position: usize, q: u8 },

    #[error("alphabet mismatch: expected q = {expected}, got q = {actual}")]
    AlphabetMismatch { expected: u8, actual: u8 },

    #[error("OutputTooLong: shortest fraction needs {needed} digits but only {target_len} are available")]
    OutputTooLong { needed: usize, target_len: usize },

    #[error("IterationGuardExceeded: loop did not terminate within {limit} iterations")]
    IterationGuardExceeded { limit: usize },

    #[error("invalid codeword: unexpected flag suffix {suffix:?}")]
    InvalidCodeword { suffix: Vec<u8> },

    #[error("sequence already satisfies the constraint; no step applies")]
    AlreadyBalanced,

    #[error("invalid interval: require 0 <= lo < hi <= 1")]
    InvalidInterval,
}

pub type Result<T> = std::result::Result<T, Error>;
