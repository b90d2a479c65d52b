//! Signatures, compact representations and the closure engines.

mod affine;
mod closure;
mod edge;
mod explicit;
mod signature;

use thiserror::Error;

use crate::algebra::{AlgebraError, Witness};
use crate::model::{ModelError, Value};

pub use affine::{affine_hull, AffineState};
pub use closure::{closure, extract_compact_representation, reconstruct, CompactRepresentation};
pub use edge::{is_idempotent, search_edge_terms, EdgeOperation, EdgeTerms};
pub use explicit::{EngineKind, ExplicitEngine, Measure};
pub use signature::{
    edge_signature, edge_witnesses, index_subsets, signature, signature_witnesses, EdgeSignature,
    Signature,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MaltsevError {
    #[error("not a Maltsev operation: identities fail at x={x}, y={y}")]
    NotMaltsev { x: Value, y: Value },
    #[error("not a {k}-edge operation: identity fails at {args:?}")]
    NotEdge { k: usize, args: Vec<Value> },
    #[error("edge terms: {0}")]
    EdgeTerms(String),
    #[error("relation is not invariant: {:?} maps to {}", .0.tuples, .0.output)]
    NotInvariant(Box<Witness>),
    #[error("modulus {0} is not prime")]
    NotPrime(u32),
    #[error("modulus mismatch: state over Z_{expected}, relation over Z_{got}")]
    ModulusMismatch { expected: u32, got: u32 },
    #[error("scope has {got} variables, relation arity is {expected}")]
    ScopeArity { expected: usize, got: usize },
    #[error("variable {var} out of range (vars {n})")]
    VariableOutOfRange { var: usize, n: usize },
    #[error("tuple arity {got}, expected {expected}")]
    TupleArity { expected: usize, got: usize },
    #[error("value {value} outside the domain of size {domain}")]
    ValueOutOfRange { value: Value, domain: u32 },
    #[error("{what} exceeded the cap of {cap}")]
    LimitExceeded { what: &'static str, cap: u64 },
    #[error("audit failed: {0}")]
    AuditFailed(String),
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
