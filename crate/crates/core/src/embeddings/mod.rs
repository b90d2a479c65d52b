//! Embeddings into Maltsev-invariant languages, their validation, and the
//! classifier combining upper- and lower-bound evidence.

mod catalog;
mod classify;
mod embedding;
mod group;
mod polynomial;
mod symbolic;
mod text;

use thiserror::Error;

use crate::algebra::AlgebraError;
use crate::maltsev::MaltsevError;
use crate::model::{ModelError, ParseError};

pub use catalog::catalog;
pub use classify::{
    affine_embedding_search, classify, degree_extension_exact, domain_relation, malt2_relation,
    malt2_term, ClassifierVerdict, ClassifyOptions, UniversalEvidence,
};
pub use embedding::{
    coset_embedding, one_in_k_embedding, one_in_k_relation, validate_embedding, Clause, Diagnostic,
    Embedding, OpSpec, ValidationReport,
};
pub use group::{coset_identity_violation, Group};
pub use polynomial::{polynomial_embedding, Monomial, PolyRelation};
pub use symbolic::{symbolic_maltsev_closure, SymbolicReport, SymbolicStatus, SymbolicViolation};
pub use text::{parse_embedding_file, serialize_embedding_file, EmbeddingFile};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EmbeddingError {
    #[error("invalid group: {0}")]
    Group(String),
    #[error("modulus {0} is not prime")]
    NotPrime(u32),
    #[error("embedding not validated: {0}")]
    Unvalidated(String),
    #[error("{what} exceeded the cap of {cap}")]
    LimitExceeded { what: &'static str, cap: u64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Maltsev(#[from] MaltsevError),
    #[error(transparent)]
    Model(#[from] ModelError),
}
