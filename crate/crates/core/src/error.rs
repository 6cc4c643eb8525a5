use thiserror::Error;

/// Errors raised by every module of the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("level {level}: polynomial is not monic")]
    NonMonic { level: usize },
    #[error("{0}")]
    NotEisenstein(String),
    #[error("level {level}: reduction of the level polynomial is not irreducible")]
    NotUnramified { level: usize },
    #[error("level {level}: designated uniformizer has valuation {valuation}, expected 1")]
    UniformizerNotValuationOne { level: usize, valuation: String },
    #[error("precision {0} is below the minimum of 2")]
    PrecisionTooSmall(u32),
    #[error("precision of {digits} digits does not fit the 62-bit coefficient modulus for p = {p}")]
    PrecisionTooLarge { p: u64, digits: u32 },
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("element of valuation {valuation} is not divisible by the uniformizer to the power {k}")]
    NotDivisible { valuation: String, k: u32 },
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("integrality failure in structure polynomial {kind} index {index}")]
    IntegralityFailure { kind: String, index: usize },
    #[error("Witt vector lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("operands live over different rings")]
    RingMismatch,
    #[error("Witt vector of length {0} is too short for this operation")]
    LengthTooShort(usize),
    #[error("compatibility violated at index {index}")]
    CompatibilityViolation { index: usize },
    #[error("ring is not of characteristic p: pi is nonzero at this precision")]
    WrongCharacteristic,
    #[error("window depth exhausted")]
    DepthExhausted,
    #[error("insufficient depth: need {needed}, have {available}")]
    InsufficientDepth { needed: usize, available: usize },
    #[error("requested depth {requested} exceeds the budget {budget}")]
    DepthBudgetExceeded { requested: u32, budget: u32 },
    #[error("resonance: f1^{j} - f1 vanishes")]
    ResonanceDivisionByZero { j: usize },
    #[error("leading coefficient f1 of the Frobenius series is zero")]
    ZeroLinearTerm,
    #[error("need at least two finite points for a Newton polygon")]
    DegenerateInput,
    #[error("break multiset has {size} entries, expected {expected}")]
    InvalidMultiset { size: usize, expected: usize },
    #[error("norm compatibility fails at level {level}")]
    NormIncompatible { level: usize },
    #[error("no q-power of the uniformizer matches within depth {depth}")]
    NoMatchWithinDepth { depth: usize },
    #[error("elementary field of degree {degree} is not a tower level")]
    ElementaryFieldUnidentified { degree: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable machine-readable tag used in emitted error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonMonic { .. } => "NonMonic",
            Error::NotEisenstein(_) => "NotEisenstein",
            Error::NotUnramified { .. } => "NotUnramified",
            Error::UniformizerNotValuationOne { .. } => "UniformizerNotValuationOne",
            Error::PrecisionTooSmall(_) => "PrecisionTooSmall",
            Error::PrecisionTooLarge { .. } => "PrecisionTooLarge",
            Error::Malformed(_) => "Malformed",
            Error::NotDivisible { .. } => "NotDivisible",
            Error::PrecisionExhausted(_) => "PrecisionExhausted",
            Error::IntegralityFailure { .. } => "IntegralityFailure",
            Error::LengthMismatch(..) => "LengthMismatch",
            Error::RingMismatch => "RingMismatch",
            Error::LengthTooShort(_) => "LengthTooShort",
            Error::CompatibilityViolation { .. } => "CompatibilityViolation",
            Error::WrongCharacteristic => "WrongCharacteristic",
            Error::DepthExhausted => "DepthExhausted",
            Error::InsufficientDepth { .. } => "InsufficientDepth",
            Error::DepthBudgetExceeded { .. } => "DepthBudgetExceeded",
            Error::ResonanceDivisionByZero { .. } => "ResonanceDivisionByZero",
            Error::ZeroLinearTerm => "ZeroLinearTerm",
            Error::DegenerateInput => "DegenerateInput",
            Error::InvalidMultiset { .. } => "InvalidMultiset",
            Error::NormIncompatible { .. } => "NormIncompatible",
            Error::NoMatchWithinDepth { .. } => "NoMatchWithinDepth",
            Error::ElementaryFieldUnidentified { .. } => "ElementaryFieldUnidentified",
        }
    }

    /// True for errors caused by malformed or invalid user input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NonMonic { .. }
                | Error::NotEisenstein(_)
                | Error::NotUnramified { .. }
                | Error::UniformizerNotValuationOne { .. }
                | Error::PrecisionTooSmall(_)
                | Error::PrecisionTooLarge { .. }
                | Error::Malformed(_)
                | Error::DepthBudgetExceeded { .. }
                | Error::LengthMismatch(..)
                | Error::RingMismatch
                | Error::LengthTooShort(_)
                | Error::InvalidMultiset { .. }
                | Error::DegenerateInput
                | Error::ZeroLinearTerm
        )
    }
}
