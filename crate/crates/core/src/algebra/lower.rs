//! The malt₁ test, the vertex-cover gadget relation and the co-clone test.

use super::operation::{post_lattice_witnesses, PartialOperation};
use super::preserve::{partial_preserves_language, preserves_language, PreservationVerdict};
use super::AlgebraError;
use crate::limits::Limits;
use crate::model::{DomainSpec, Language, RTuple, Relation};

/// `(x1 ∨ x4) ∧ (x1 ≠ x3) ∧ (x2 ≠ x4) ∧ (x5 = 0) ∧ (x6 = 1)`.
///
/// Its three tuples, read column by column, list every argument tuple of
/// malt₁ exactly once.
pub fn gadget_relation() -> Relation {
    Relation::new(
        "GADGET",
        DomainSpec::BOOLEAN,
        6,
        [[0, 0, 1, 1, 0, 1], [1, 0, 0, 1, 0, 1], [1, 1, 0, 0, 0, 1]].map(RTuple::from),
    )
    .expect("static relation")
}

/// Is malt₁ a partial polymorphism of every relation of `language`?
pub fn check_malt1(
    language: &Language,
    limits: &Limits,
) -> Result<PreservationVerdict, AlgebraError> {
    if !language.domain().is_boolean() {
        return Err(AlgebraError::NotBoolean);
    }
    partial_preserves_language(&PartialOperation::malt1(), language, limits)
}

/// Names of the Post-lattice witness operations that preserve every relation.
pub fn preserving_post_witnesses(
    language: &Language,
    limits: &Limits,
) -> Result<Vec<&'static str>, AlgebraError> {
    if !language.domain().is_boolean() {
        return Err(AlgebraError::NotBoolean);
    }
    let mut out = Vec::new();
    for (name, op) in post_lattice_witnesses() {
        if preserves_language(&op, language, limits)?.preserved {
            out.push(name);
        }
    }
    Ok(out)
}

/// True iff the language pp-defines every Boolean relation, i.e. none of the
/// constants, negation, ∧, ∨, majority and minority preserves it.
pub fn co_clone_is_br(language: &Language, limits: &Limits) -> Result<bool, AlgebraError> {
    Ok(preserving_post_witnesses(language, limits)?.is_empty())
}
