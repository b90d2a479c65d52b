//! Enumeration of universal partial Maltsev operations: Boolean restrictions
//! of term operations over the free symbolic Maltsev operation.

use serde::{Deserialize, Serialize};

use super::operation::PartialOperation;
use super::term::{restrict_term, Term};
use super::AlgebraError;
use crate::limits::Limits;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalOperation {
    pub term: Term,
    pub op: PartialOperation,
}

/// All term shapes of depth exactly `1..=max_depth` with fresh variables.
///
/// Shapes of depth `d` are the triples over shapes of depth `< d` with at
/// least one child of depth `d-1`, in lexicographic order of the children's
/// positions in the list of shallower shapes.
pub fn term_shapes(max_depth: usize, cap: u64) -> Result<Vec<Term>, AlgebraError> {
    let mut all: Vec<Term> = vec![Term::Var(0)];
    let mut by_depth: Vec<usize> = vec![0]; // depth of all[i]
    for d in 1..=max_depth {
        let shallower = all.len();
        let below = all.iter().filter(|t| t.depth() + 1 < d).count();
        let fresh = (shallower as u128).pow(3) - (below as u128).pow(3);
        if all.len() as u128 - 1 + fresh > cap as u128 {
            return Err(AlgebraError::LimitExceeded {
                what: "enumerated terms",
                cap,
            });
        }
        for a in 0..shallower {
            for b in 0..shallower {
                for c in 0..shallower {
                    if by_depth[a].max(by_depth[b]).max(by_depth[c]) + 1 != d {
                        continue;
                    }
                    all.push(Term::app(all[a].clone(), all[b].clone(), all[c].clone()));
                    by_depth.push(d);
                }
            }
        }
    }
    Ok(all
        .into_iter()
        .skip(1)
        .map(|t| t.with_fresh_variables())
        .collect())
}

/// Enumerates universal partial Maltsev operations from terms of depth
/// `1..=max_depth`, dropping any operation that is a subfunction of an
/// earlier one of the same arity.
pub fn enumerate_universal_maltsev(
    max_depth: usize,
    limits: &Limits,
) -> Result<Vec<UniversalOperation>, AlgebraError> {
    if max_depth == 0 {
        return Err(AlgebraError::InvalidArgument(
            "max_depth must be at least 1".into(),
        ));
    }
    let shapes = term_shapes(max_depth, limits.terms)?;
    let work: u128 = shapes.iter().map(|t| 1u128 << t.arity().min(120)).sum();
    if work > limits.applications as u128 {
        return Err(AlgebraError::LimitExceeded {
            what: "term evaluations",
            cap: limits.applications,
        });
    }
    let mut out: Vec<UniversalOperation> = Vec::new();
    for term in shapes {
        let op = restrict_term(&term);
        if out.iter().any(|prev| op.is_subfunction_of(&prev.op)) {
            continue;
        }
        out.push(UniversalOperation { term, op });
    }
    Ok(out)
}
