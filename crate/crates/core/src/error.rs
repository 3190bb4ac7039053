use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("deck size {0} is out of range (need 5..=255)")]
    DeckSize(usize),
    #[error("card value {value} is outside 1..={n}")]
    ValueOutOfRange { value: usize, n: usize },
    #[error("duplicate card value {0}")]
    DuplicateValue(usize),
    #[error("missing card value {0}")]
    MissingValue(usize),
    #[error("unknown token {0:?}")]
    UnknownToken(String),
    #[error("deck sizes differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("modulus mismatch: accumulator uses {expected}, got {found}")]
    ModulusMismatch { expected: u32, found: u32 },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("state space of {states} exceeds census budget {budget}")]
    BudgetExceeded { states: u64, budget: u64 },
    #[error("trace and stream are misaligned: {0} traces, {1} outputs")]
    Misaligned(usize, usize),
}

pub type Result<T> = std::result::Result<T, Error>;
