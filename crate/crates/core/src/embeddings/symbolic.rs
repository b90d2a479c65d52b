//! Bounded closure of a Boolean relation under the free Maltsev operation.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::EmbeddingError;
use crate::algebra::{InfArena, Term};
use crate::limits::Limits;
use crate::model::{RTuple, Relation, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SymbolicStatus {
    ClosedAtDepth,
    Violation,
}

/// A Boolean tuple outside the relation, produced by `term` applied to
/// `leaves` (leaf `x_i` is `leaves[i-1]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicViolation {
    pub depth: usize,
    pub term: Term,
    pub leaves: Vec<RTuple>,
    pub output: RTuple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolicReport {
    pub status: SymbolicStatus,
    pub depth: usize,
    /// Distinct tuples held when the search stopped, the relation included.
    pub generated: usize,
    pub violation: Option<SymbolicViolation>,
}

struct Closure<'a> {
    relation: &'a Relation,
    arena: InfArena,
    tuples: Vec<Vec<u32>>,
    level: Vec<usize>,
    parents: Vec<Option<[usize; 3]>>,
    index: HashMap<Vec<u32>, usize>,
    applications: u64,
    limits: &'a Limits,
}

impl Closure<'_> {
    fn apply(&mut self, a: usize, b: usize, c: usize) -> Result<Vec<u32>, EmbeddingError> {
        self.applications += 1;
        if self.applications > self.limits.applications {
            return Err(EmbeddingError::LimitExceeded {
                what: "symbolic closure",
                cap: self.limits.applications,
            });
        }
        let r = self.relation.arity();
        let mut out = Vec::with_capacity(r);
        for col in 0..r {
            let (x, y, z) = (
                self.tuples[a][col],
                self.tuples[b][col],
                self.tuples[c][col],
            );
            out.push(self.arena.u(x, y, z));
        }
        Ok(out)
    }

    fn is_outside(&self, t: &[u32]) -> bool {
        t.iter().all(|&v| InfArena::is_atom(v)) && !self.relation.contains(t)
    }

    fn violation(&self, parents: [usize; 3], output: Vec<u32>, depth: usize) -> SymbolicViolation {
        let mut leaves: Vec<usize> = Vec::new();
        let args = parents.map(|p| self.term_of(p, &mut leaves));
        let [a, b, c] = args;
        let tuples = self.relation.tuples();
        SymbolicViolation {
            depth,
            term: Term::app(a, b, c),
            leaves: leaves.iter().map(|&i| tuples[i].clone()).collect(),
            output: RTuple(output),
        }
    }

    fn term_of(&self, id: usize, leaves: &mut Vec<usize>) -> Term {
        match self.parents[id] {
            None => {
                let pos = leaves.iter().position(|&l| l == id).unwrap_or_else(|| {
                    leaves.push(id);
                    leaves.len() - 1
                });
                Term::Var(pos)
            }
            Some([a, b, c]) => {
                let ta = self.term_of(a, leaves);
                let tb = self.term_of(b, leaves);
                let tc = self.term_of(c, leaves);
                Term::app(ta, tb, tc)
            }
        }
    }

    /// Adds every tuple produced by a triple touching the newest level.
    fn grow(&mut self, depth: usize) -> Result<Option<SymbolicViolation>, EmbeddingError> {
        let start = self
            .level
            .iter()
            .position(|&l| l == depth - 1)
            .unwrap_or(self.tuples.len());
        let n = self.tuples.len();
        for i in 0..n {
            for j in 0..n {
                let k_from = if i < start && j < start { start } else { 0 };
                for k in k_from..n {
                    let out = self.apply(i, j, k)?;
                    if self.index.contains_key(&out) {
                        continue;
                    }
                    if self.is_outside(&out) {
                        return Ok(Some(self.violation([i, j, k], out, depth)));
                    }
                    if self.tuples.len() as u64 >= self.limits.tuples {
                        return Err(EmbeddingError::LimitExceeded {
                            what: "symbolic closure",
                            cap: self.limits.tuples,
                        });
                    }
                    self.index.insert(out.clone(), self.tuples.len());
                    self.tuples.push(out);
                    self.level.push(depth);
                    self.parents.push(Some([i, j, k]));
                }
            }
        }
        Ok(None)
    }

    /// The last level: only triples whose image is Boolean matter, so `t3`
    /// must agree with `t2` wherever `t1` and `t2` differ.
    fn last_level(&mut self, depth: usize) -> Result<Option<SymbolicViolation>, EmbeddingError> {
        let n = self.tuples.len();
        let r = self.relation.arity();
        let boolean_cols: Vec<Vec<bool>> = self
            .tuples
            .iter()
            .map(|t| t.iter().map(|&v| InfArena::is_atom(v)).collect())
            .collect();
        let mut by_column: HashMap<(usize, u32), Vec<usize>> = HashMap::new();
        for (idx, t) in self.tuples.iter().enumerate() {
            for (col, &v) in t.iter().enumerate() {
                by_column.entry((col, v)).or_default().push(idx);
            }
        }
        let newest = depth - 1;
        for i in 0..n {
            for j in 0..n {
                let t1 = &self.tuples[i];
                let t2 = &self.tuples[j];
                let Some(first) = (0..r).find(|&c| t1[c] != t2[c]) else {
                    continue;
                };
                // u(a, b, c) with a ≠ b is Boolean only if b = c and a is Boolean
                if (first..r).any(|c| t1[c] != t2[c] && !boolean_cols[i][c]) {
                    continue;
                }
                let Some(candidates) = by_column.get(&(first, t2[first])) else {
                    continue;
                };
                let old_pair = self.level[i] < newest && self.level[j] < newest;
                for &k in candidates {
                    if old_pair && self.level[k] < newest {
                        continue;
                    }
                    let t3 = &self.tuples[k];
                    let fits = (0..r).all(|c| {
                        if t1[c] != t2[c] {
                            t3[c] == t2[c]
                        } else {
                            boolean_cols[k][c]
                        }
                    });
                    if !fits {
                        continue;
                    }
                    self.applications += 1;
                    if self.applications > self.limits.applications {
                        return Err(EmbeddingError::LimitExceeded {
                            what: "symbolic closure",
                            cap: self.limits.applications,
                        });
                    }
                    let out: Vec<Value> = (0..r)
                        .map(|c| if t1[c] != t2[c] { t1[c] } else { t3[c] })
                        .collect();
                    if !self.relation.contains(&out) {
                        return Ok(Some(self.violation([i, j, k], out, depth)));
                    }
                }
            }
        }
        Ok(None)
    }
}

/// Explores `⟨R⟩_u` through terms of depth at most `depth` and reports the
/// first Boolean tuple outside `R`. Triples are visited in lexicographic
/// order of tuple indices, with `R` itself sorted, so at depth 1 the result
/// coincides with the first malt₁ witness.
pub fn symbolic_maltsev_closure(
    relation: &Relation,
    depth: usize,
    limits: &Limits,
) -> Result<SymbolicReport, EmbeddingError> {
    if depth == 0 {
        return Err(EmbeddingError::InvalidArgument(
            "depth must be at least 1".into(),
        ));
    }
    if !relation.domain().is_boolean() {
        return Err(EmbeddingError::InvalidArgument(format!(
            "{} is not a Boolean relation",
            relation.name()
        )));
    }
    let tuples: Vec<Vec<u32>> = relation.tuples().iter().map(|t| t.0.clone()).collect();
    let n = tuples.len();
    let mut cl = Closure {
        relation,
        arena: InfArena::new(),
        index: tuples.iter().cloned().zip(0..).collect(),
        tuples,
        level: vec![0; n],
        parents: vec![None; n],
        applications: 0,
        limits,
    };
    for d in 1..=depth {
        let found = if d == depth {
            cl.last_level(d)?
        } else {
            cl.grow(d)?
        };
        if let Some(v) = found {
            return Ok(SymbolicReport {
                status: SymbolicStatus::Violation,
                depth: d,
                generated: cl.tuples.len(),
                violation: Some(v),
            });
        }
        if d < depth && !cl.level.contains(&d) {
            break;
        }
    }
    Ok(SymbolicReport {
        status: SymbolicStatus::ClosedAtDepth,
        depth,
        generated: cl.tuples.len(),
        violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_malt1, partial_preserves, restrict_term};
    use crate::embeddings::embedding::one_in_k_relation;
    use crate::model::{DomainSpec, Language};
    use proptest::prelude::*;

    fn mod6(k: usize) -> Relation {
        Relation::from_predicate("M6", DomainSpec::BOOLEAN, k, |t| {
            matches!(t.iter().sum::<u32>() % 6, 1 | 2)
        })
        .unwrap()
    }

    #[test]
    fn one_in_three_closed() {
        let r = symbolic_maltsev_closure(&one_in_k_relation(3), 3, &Limits::default()).unwrap();
        assert_eq!(r.status, SymbolicStatus::ClosedAtDepth);
        assert!(r.violation.is_none());
    }

    #[test]
    fn mod6_violates_at_depth_one() {
        let r = symbolic_maltsev_closure(&mod6(3), 1, &Limits::default()).unwrap();
        assert_eq!(r.status, SymbolicStatus::Violation);
        let v = r.violation.unwrap();
        assert_eq!(v.depth, 1);
        assert_eq!(v.term.to_string(), "u(x1,x2,x3)");
        assert_eq!(
            v.leaves,
            vec![
                RTuple::from([0, 0, 1]),
                RTuple::from([0, 1, 1]),
                RTuple::from([0, 1, 0])
            ]
        );
        assert_eq!(v.output, RTuple::from([0, 0, 0]));
    }

    #[test]
    fn empty_relation_is_vacuous() {
        let r = Relation::new("E", DomainSpec::BOOLEAN, 3, []).unwrap();
        for depth in 1..4 {
            assert_eq!(
                symbolic_maltsev_closure(&r, depth, &Limits::default())
                    .unwrap()
                    .status,
                SymbolicStatus::ClosedAtDepth
            );
        }
        assert!(symbolic_maltsev_closure(&r, 0, &Limits::default()).is_err());
    }

    #[test]
    fn violation_term_reproduces_output() {
        let r = mod6(4);
        let v = symbolic_maltsev_closure(&r, 2, &Limits::default())
            .unwrap()
            .violation
            .unwrap();
        let op = restrict_term(&v.term);
        let refs: Vec<&[u32]> = v.leaves.iter().map(|t| t.0.as_slice()).collect();
        let out = crate::algebra::apply_componentwise(&op, &refs)
            .unwrap()
            .unwrap();
        assert_eq!(out, v.output);
        assert!(!r.contains(&out));
    }

    fn arb_relation() -> impl Strategy<Value = Relation> {
        (1usize..=4).prop_flat_map(|k| {
            proptest::collection::vec(proptest::collection::vec(0u32..2, k), 0..8).prop_map(
                move |ts| {
                    Relation::new("R", DomainSpec::BOOLEAN, k, ts.into_iter().map(RTuple)).unwrap()
                },
            )
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn depth_one_matches_malt1(r in arb_relation()) {
            let lang = Language::with_relations(DomainSpec::BOOLEAN, [r.clone().into()]).unwrap();
            let malt1 = check_malt1(&lang, &Limits::default()).unwrap();
            let sym = symbolic_maltsev_closure(&r, 1, &Limits::default()).unwrap();
            prop_assert_eq!(malt1.preserved, sym.status == SymbolicStatus::ClosedAtDepth);
            if let Some(v) = sym.violation {
                let w = malt1.witness.unwrap();
                prop_assert_eq!(v.output, w.output);
            }
        }

        #[test]
        fn depth_two_matches_universal_terms(r in arb_relation()) {
            let sym = symbolic_maltsev_closure(&r, 2, &Limits::default()).unwrap();
            let ops = crate::algebra::enumerate_universal_maltsev(2, &Limits::default()).unwrap();
            let all = ops.iter().all(|u| partial_preserves(&u.op, &r, &Limits::default()).unwrap().preserved);
            prop_assert_eq!(all, sym.status == SymbolicStatus::ClosedAtDepth);
        }
    }
}
