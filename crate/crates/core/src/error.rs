use thiserror::Error;

use crate::fnspace::Elem;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("table has {found} entries, expected {expected}")]
    TableSize { expected: usize, found: usize },
    #[error("value {value} is outside the carrier of size {size}")]
    OutOfRange { value: u64, size: usize },
    #[error("element {0} does not belong to the carrier")]
    NotInCarrier(Elem),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("operations live on different carriers")]
    CarrierMismatch,
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("map is not a bijection of the carrier")]
    NotBijective,
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("size budget exceeded: {what} (cap {cap})")]
    BudgetExceeded { what: &'static str, cap: usize },
    #[error("no witness: {0}")]
    NoWitness(String),
    #[error("no interpolant agrees with the operation on the window")]
    InterpolationFailed,
    #[error("modulus not found within a budget of {budget} windows")]
    ModulusNotFound { budget: usize },
    #[error("invalid seed: {0}")]
    InvalidSeed(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
