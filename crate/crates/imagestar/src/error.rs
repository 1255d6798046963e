//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{context}: expected dimension {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("shape error: {0}")]
    Shape(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("the set is empty")]
    EmptySet,
    #[error("the set is unbounded along the queried direction")]
    UnboundedSet,
    #[error("exact-scheme star budget exceeded: {count} stars > budget {budget}")]
    BudgetExceeded { count: usize, budget: usize },
    #[error("no pixel reaches the attack threshold; the input set is the singleton {{image}}")]
    NoAttackedPixels,
    #[error(
        "counterexample mapping needs {expected} predicate variables matching the input set, \
         found {found}; over-approximate predicates cannot be mapped back"
    )]
    WitnessMappingFailed { expected: usize, found: usize },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
