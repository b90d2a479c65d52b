//! Operations, polymorphism checks, the symbolic Maltsev domain and the
//! Boolean-language tests built on them.

mod inf;
mod lower;
mod operation;
mod preserve;
mod qfpp;
mod term;
mod universal;

use thiserror::Error;

use crate::model::{ModelError, Value};

pub use inf::{u_apply, InfArena, InfElement};
pub use lower::{check_malt1, co_clone_is_br, gadget_relation, preserving_post_witnesses};
pub use operation::{
    apply_componentwise, post_lattice_witnesses, restrict_to_boolean, Operation, PartialOperation,
    TotalOperation,
};
pub use preserve::{
    partial_preserves, partial_preserves_language, preserves, preserves_language,
    PreservationVerdict, Witness,
};
pub use qfpp::{qfpp_definable, QfppFormula};
pub use term::{eval_term, restrict_term, term_operation, Term};
pub use universal::{enumerate_universal_maltsev, term_shapes, UniversalOperation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("expected {expected} arguments, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("tuples of differing arity: expected {expected}, got {got}")]
    TupleArity { expected: usize, got: usize },
    #[error("operation table has {got} entries, expected {expected}")]
    TableSize { got: usize, expected: u128 },
    #[error("value {value} outside the domain of size {domain}")]
    ValueOutOfRange { value: Value, domain: u32 },
    #[error("operation over a domain of size {op} cannot act on a relation over size {relation}")]
    DomainMismatch { op: u32, relation: u32 },
    #[error("the language is not Boolean")]
    NotBoolean,
    #[error("{what} exceeded the cap of {cap}")]
    LimitExceeded { what: &'static str, cap: u64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
