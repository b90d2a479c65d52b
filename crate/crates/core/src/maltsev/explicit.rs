//! The resource-bounded engine for arbitrary Maltsev or k-edge operations.
//!
//! The current solution space `⟨S⟩` is held explicitly; `S` is re-extracted
//! after every kept constraint and entailment is decided on `S` alone.

use serde::{Deserialize, Serialize};

use super::closure::closure;
use super::edge::{EdgeOperation, EdgeTerms};
use super::signature::{
    edge_signature, edge_witnesses, signature, signature_witnesses, EdgeSignature, Signature,
};
use super::MaltsevError;
use crate::algebra::TotalOperation;
use crate::limits::Limits;
use crate::model::{for_each_tuple, LangRelation, RTuple, Value};

/// How representations are extracted and chain progress is measured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineKind {
    /// Signatures of a Maltsev operation.
    Maltsev(TotalOperation),
    /// `sig_e` and projections of a k-edge operation with its `d` term.
    Edge {
        edge: EdgeOperation,
        terms: EdgeTerms,
    },
}

/// Size of the chain measure before and after a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measure {
    pub sig: usize,
    pub proj: usize,
}

#[derive(Debug, Clone)]
pub struct ExplicitEngine {
    n: usize,
    kind: EngineKind,
    space: Vec<RTuple>,
    rep: Vec<RTuple>,
    audit: bool,
    limits: Limits,
}

impl ExplicitEngine {
    /// Starts from the full space `D^n`. With `audit` set, every step also
    /// recomputes `⟨S⟩` by closure and checks it against the held space.
    pub fn new(
        n: usize,
        kind: EngineKind,
        audit: bool,
        limits: Limits,
    ) -> Result<Self, MaltsevError> {
        let op = kind_op(&kind);
        if let EngineKind::Maltsev(m) = &kind {
            if let Some((x, y)) = m.maltsev_violation() {
                return Err(MaltsevError::NotMaltsev { x, y });
            }
        }
        if let EngineKind::Edge { edge, terms } = &kind {
            terms.audit(edge.k())?;
        }
        let d = op.domain();
        if d.power(n) > limits.tuples as u128 {
            return Err(MaltsevError::LimitExceeded {
                what: "explicit solution space",
                cap: limits.tuples,
            });
        }
        let mut space = Vec::with_capacity(d.power(n) as usize);
        for_each_tuple(d, n, |t| space.push(RTuple(t.to_vec())));
        let mut engine = ExplicitEngine {
            n,
            kind,
            space,
            rep: Vec::new(),
            audit,
            limits,
        };
        engine.rep = engine.extract(&engine.space);
        Ok(engine)
    }

    fn extract(&self, tuples: &[RTuple]) -> Vec<RTuple> {
        match &self.kind {
            EngineKind::Maltsev(_) => signature_witnesses(tuples),
            EngineKind::Edge { edge, terms } => edge_witnesses(tuples, &terms.d, edge.k()),
        }
    }

    pub fn op(&self) -> &TotalOperation {
        kind_op(&self.kind)
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    /// The held solution space `⟨S⟩`, sorted.
    pub fn space(&self) -> &[RTuple] {
        &self.space
    }

    /// The current representation `S`.
    pub fn representation(&self) -> &[RTuple] {
        &self.rep
    }

    pub fn signature(&self) -> Signature {
        signature(&self.rep)
    }

    pub fn edge_signature(&self) -> Option<EdgeSignature> {
        match &self.kind {
            EngineKind::Maltsev(_) => None,
            EngineKind::Edge { edge, terms } => Some(edge_signature(&self.rep, &terms.d, edge.k())),
        }
    }

    pub fn measure(&self) -> Measure {
        match self.edge_signature() {
            None => Measure {
                sig: self.signature().len(),
                proj: 0,
            },
            Some(e) => Measure {
                sig: e.sig.len(),
                proj: e.proj.len(),
            },
        }
    }

    fn check(&self, rel: &LangRelation, scope: &[usize]) -> Result<(), MaltsevError> {
        if scope.len() != rel.arity() {
            return Err(MaltsevError::ScopeArity {
                expected: rel.arity(),
                got: scope.len(),
            });
        }
        if let Some(&v) = scope.iter().find(|&&v| v >= self.n) {
            return Err(MaltsevError::VariableOutOfRange { var: v, n: self.n });
        }
        Ok(())
    }

    /// True iff every tuple of `S` satisfies `rel(scope)`. Since `rel` is
    /// preserved by the operation, this holds iff all of `⟨S⟩` does.
    pub fn entails(&self, rel: &LangRelation, scope: &[usize]) -> Result<bool, MaltsevError> {
        self.check(rel, scope)?;
        let mut buf: Vec<Value> = Vec::with_capacity(scope.len());
        Ok(self.rep.iter().all(|t| {
            buf.clear();
            buf.extend(scope.iter().map(|&v| t[v]));
            rel.contains(&buf)
        }))
    }

    /// Restricts the space to `rel(scope)` and re-extracts `S`.
    pub fn advance(&mut self, rel: &LangRelation, scope: &[usize]) -> Result<(), MaltsevError> {
        self.check(rel, scope)?;
        let mut buf: Vec<Value> = Vec::with_capacity(scope.len());
        self.space.retain(|t| {
            buf.clear();
            buf.extend(scope.iter().map(|&v| t[v]));
            rel.contains(&buf)
        });
        self.rep = self.extract(&self.space);
        if self.audit {
            let regenerated = closure("audit", self.n, &self.rep, self.op(), &self.limits)?;
            if regenerated.tuples() != self.space.as_slice() {
                return Err(MaltsevError::AuditFailed(format!(
                    "closure of the representation has {} tuples, space has {}",
                    regenerated.len(),
                    self.space.len()
                )));
            }
        }
        Ok(())
    }
}

fn kind_op(kind: &EngineKind) -> &TotalOperation {
    match kind {
        EngineKind::Maltsev(m) => m,
        EngineKind::Edge { edge, .. } => edge.op(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::maltsev::edge::search_edge_terms;
    use crate::model::{AffineRelation, AffineRow, DomainSpec, Relation};

    fn z3() -> TotalOperation {
        TotalOperation::affine_maltsev(3)
    }

    fn eq_mod3(c: [u32; 3], b: u32) -> LangRelation {
        AffineRelation::new(
            "A",
            3,
            3,
            vec![AffineRow {
                coeffs: c.to_vec(),
                rhs: b,
            }],
        )
        .unwrap()
        .into()
    }

    #[test]
    fn generic_follows_affine_constraints() {
        let mut e =
            ExplicitEngine::new(4, EngineKind::Maltsev(z3()), true, Limits::default()).unwrap();
        assert_eq!(e.space().len(), 81);
        let r = eq_mod3([1, 1, 1], 1);
        assert!(!e.entails(&r, &[0, 1, 2]).unwrap());
        let before = e.signature();
        e.advance(&r, &[0, 1, 2]).unwrap();
        assert_eq!(e.space().len(), 27);
        assert!(e.entails(&r, &[0, 1, 2]).unwrap());
        assert!(before.is_superset(&e.signature()));
        assert!(e.representation().len() <= 2 * e.signature().len());
    }

    #[test]
    fn single_tuple_outside_is_detected() {
        let e =
            ExplicitEngine::new(2, EngineKind::Maltsev(z3()), false, Limits::default()).unwrap();
        let r: LangRelation =
            Relation::from_predicate("NZ", DomainSpec::new(3).unwrap(), 1, |t| t[0] != 2)
                .unwrap()
                .into();
        assert!(!e.entails(&r, &[0]).unwrap());
        let full: LangRelation =
            Relation::from_predicate("F", DomainSpec::new(3).unwrap(), 2, |_| true)
                .unwrap()
                .into();
        assert!(e.entails(&full, &[1, 0]).unwrap());
    }

    #[test]
    fn edge_engine_with_majority() {
        let d3 = DomainSpec::new(3).unwrap();
        let median = TotalOperation::from_fn(3, d3, |a| {
            let mut v = [a[0], a[1], a[2]];
            v.sort();
            v[1]
        });
        let edge = EdgeOperation::from_majority(&median).unwrap();
        let terms = search_edge_terms(&edge, 2, &Limits::default()).unwrap();
        let mut e =
            ExplicitEngine::new(3, EngineKind::Edge { edge, terms }, true, Limits::default())
                .unwrap();
        // x ≤ y is preserved by the median
        let le: LangRelation = Relation::from_predicate("LE", d3, 2, |t| t[0] <= t[1])
            .unwrap()
            .into();
        let m0 = e.measure();
        assert_eq!(m0.sig, 3 * 3);
        assert_eq!(m0.proj, 3 * 3 + 3 * 9);
        e.advance(&le, &[0, 1]).unwrap();
        e.advance(&le, &[1, 2]).unwrap();
        assert!(e.entails(&le, &[0, 2]).unwrap());
        assert_eq!(e.space().len(), 10);
    }

    #[test]
    fn size_cap() {
        let tight = Limits {
            tuples: 100,
            ..Limits::default()
        };
        assert!(matches!(
            ExplicitEngine::new(5, EngineKind::Maltsev(z3()), false, tight),
            Err(MaltsevError::LimitExceeded { .. })
        ));
    }
}
