use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors shared by all modules. Exhaustion of finite data is *not* an
/// error — procedures that can run out of ground material report it as a
/// structured outcome instead.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("enumeration too large: {size} elements exceeds cap {cap}")]
    EnumerationTooLarge { size: usize, cap: usize },

    #[error("arithmetic overflow in 64-bit sum computation")]
    ArithmeticOverflow,

    #[error("source exhausted: picked {got} of {needed} admissible elements")]
    InsufficientSource { needed: usize, got: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("search too large: {0}")]
    SearchTooLarge(String),

    #[error("map domain exceeded: needs values up to {required}, domain size {domain}")]
    DomainExceeded { required: u64, domain: u64 },

    #[error("invalid chain: {0}")]
    InvalidChain(String),

    #[error("invalid probe: value {value} outside codomain [0, {codomain})")]
    InvalidProbe { value: u64, codomain: u64 },
}
