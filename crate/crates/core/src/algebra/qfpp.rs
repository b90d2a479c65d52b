//! Quantifier-free primitive positive definitions over the target's own
//! variables. Equality atoms are expressed by repeating a variable in a scope.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;
use crate::limits::Limits;
use crate::model::{
    for_each_tuple, Constraint, DomainSpec, LangRelation, Language, RTuple, Relation, Value,
};

/// A conjunction of constraint applications over variables `0..arity`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QfppFormula {
    pub arity: usize,
    pub atoms: Vec<Constraint>,
}

impl QfppFormula {
    /// The relation defined by the conjunction.
    pub fn evaluate(&self, language: &Language, limits: &Limits) -> Result<Relation, AlgebraError> {
        let d = language.domain();
        check_space(d, self.arity, limits)?;
        let rels: Vec<&LangRelation> = self
            .atoms
            .iter()
            .map(|a| language.relation(&a.relation))
            .collect::<Result<_, _>>()?;
        let mut buf = Vec::new();
        Ok(Relation::from_predicate("qfpp", d, self.arity, |t| {
            self.atoms.iter().zip(&rels).all(|(a, r)| {
                buf.clear();
                buf.extend(a.scope.iter().map(|&v| t[v]));
                r.contains(&buf)
            })
        })?)
    }
}

impl fmt::Display for QfppFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.atoms.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.atoms.iter().enumerate() {
            if i > 0 {
                write!(f, " ∧ ")?;
            }
            let vars: Vec<String> = a.scope.iter().map(|v| format!("x{}", v + 1)).collect();
            write!(f, "{}({})", a.relation, vars.join(","))?;
        }
        Ok(())
    }
}

fn check_space(d: DomainSpec, arity: usize, limits: &Limits) -> Result<(), AlgebraError> {
    if d.power(arity) > limits.tuples as u128 {
        return Err(AlgebraError::LimitExceeded {
            what: "tuples",
            cap: limits.tuples,
        });
    }
    Ok(())
}

/// Searches for a qfpp-definition of `target` over `language`.
///
/// Intersects every application `R(x_{s_1}, …, x_{s_a})` with scope in
/// `[r]^a` that contains the target, keeping only the applications that cut
/// the running intersection down. The target is definable iff the full
/// intersection equals it, so the answer is exact.
pub fn qfpp_definable(
    target: &Relation,
    language: &Language,
    limits: &Limits,
) -> Result<Option<QfppFormula>, AlgebraError> {
    let d = language.domain();
    if target.domain().size() > d.size() {
        return Err(AlgebraError::DomainMismatch {
            op: d.size(),
            relation: target.domain().size(),
        });
    }
    let r = target.arity();
    check_space(d, r, limits)?;
    let scopes: u128 = language
        .relations()
        .map(|rel| (r as u128).saturating_pow(rel.arity() as u32))
        .sum();
    if scopes.saturating_mul(target.len().max(1) as u128) > limits.applications as u128 {
        return Err(AlgebraError::LimitExceeded {
            what: "constraint applications",
            cap: limits.applications,
        });
    }

    let mut current: Vec<RTuple> = Vec::new();
    for_each_tuple(d, r, |t| current.push(RTuple(t.to_vec())));
    let mut atoms = Vec::new();
    let mut buf: Vec<Value> = Vec::new();
    for rel in language.relations() {
        let a = rel.arity();
        let mut scope = vec![0usize; a];
        loop {
            let holds = |t: &[Value], buf: &mut Vec<Value>| {
                buf.clear();
                buf.extend(scope.iter().map(|&v| t[v]));
                rel.contains(buf)
            };
            if target.tuples().iter().all(|t| holds(t, &mut buf)) {
                let before = current.len();
                current.retain(|t| holds(t, &mut buf));
                if current.len() < before {
                    atoms.push(Constraint::new(rel.name(), scope.clone()));
                }
            }
            if !advance(&mut scope, r) {
                break;
            }
        }
    }
    let defined = current.len() == target.len() && current.iter().all(|t| target.contains(t));
    Ok(defined.then_some(QfppFormula { arity: r, atoms }))
}

/// Next scope in lexicographic order over `[base]^len`.
fn advance(scope: &mut [usize], base: usize) -> bool {
    for i in (0..scope.len()).rev() {
        scope[i] += 1;
        if scope[i] < base {
            return true;
        }
        scope[i] = 0;
    }
    false
}
