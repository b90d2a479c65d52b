use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::signature::{signature, signature_witnesses, Signature};
use super::MaltsevError;
use crate::algebra::{preserves, TotalOperation};
use crate::limits::Limits;
use crate::model::{DomainSpec, RTuple, Relation, Value};

/// `⟨tuples⟩_op`: the least superset closed under componentwise application
/// of `op`, computed semi-naively (every round only combines sequences that
/// use at least one tuple found in the previous round).
pub fn closure(
    name: &str,
    arity: usize,
    tuples: &[RTuple],
    op: &TotalOperation,
    limits: &Limits,
) -> Result<Relation, MaltsevError> {
    let domain = op.domain();
    let k = op.arity();
    let mut all: Vec<RTuple> = Vec::new();
    let mut seen: HashSet<Vec<Value>> = HashSet::new();
    for t in tuples {
        if t.arity() != arity {
            return Err(MaltsevError::TupleArity {
                expected: arity,
                got: t.arity(),
            });
        }
        if let Some(&v) = t.iter().find(|&&v| !domain.contains(v)) {
            return Err(MaltsevError::ValueOutOfRange {
                value: v,
                domain: domain.size(),
            });
        }
        if seen.insert(t.0.clone()) {
            all.push(t.clone());
        }
    }
    let mut applications = 0u64;
    let mut start = 0;
    let mut column = vec![0 as Value; k];
    let mut idx = vec![0usize; k];
    while start < all.len() && k > 0 {
        let end = all.len();
        // first_new: position of the first argument drawn from the last round
        for first_new in 0..k {
            let lo = |j: usize| if j == first_new { start } else { 0 };
            let hi = |j: usize| if j < first_new { start } else { end };
            if (0..k).any(|j| lo(j) >= hi(j)) {
                continue;
            }
            for (j, x) in idx.iter_mut().enumerate() {
                *x = lo(j);
            }
            loop {
                applications += 1;
                if applications > limits.applications {
                    return Err(MaltsevError::LimitExceeded {
                        what: "closure applications",
                        cap: limits.applications,
                    });
                }
                let mut out = Vec::with_capacity(arity);
                #[allow(clippy::needless_range_loop)]
                for c in 0..arity {
                    for (x, &i) in column.iter_mut().zip(&idx) {
                        *x = all[i][c];
                    }
                    out.push(op.get(&column));
                }
                if seen.insert(out.clone()) {
                    if all.len() as u64 >= limits.tuples {
                        return Err(MaltsevError::LimitExceeded {
                            what: "closure tuples",
                            cap: limits.tuples,
                        });
                    }
                    all.push(RTuple(out));
                }
                if !step(&mut idx, lo, hi) {
                    break;
                }
            }
        }
        start = end;
    }
    all.sort();
    Ok(Relation::new(name, domain, arity, all)?)
}

/// Advances `idx` through the box `[lo(j), hi(j))` in lexicographic order.
fn step(idx: &mut [usize], lo: impl Fn(usize) -> usize, hi: impl Fn(usize) -> usize) -> bool {
    for j in (0..idx.len()).rev() {
        idx[j] += 1;
        if idx[j] < hi(j) {
            return true;
        }
        idx[j] = lo(j);
    }
    false
}

/// A subset `S` of a Maltsev-invariant relation with `sig(S) = sig(R)` and
/// `|S| ≤ 2|sig(R)|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompactRepresentation {
    pub arity: usize,
    pub domain: DomainSpec,
    pub tuples: Vec<RTuple>,
    pub signature: Signature,
    pub op: TotalOperation,
}

impl CompactRepresentation {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }
}

/// Keeps the lexicographically least witnessing pair of every signature
/// entry. Fails unless `op` is Maltsev and preserves `relation`.
pub fn extract_compact_representation(
    relation: &Relation,
    op: &TotalOperation,
    limits: &Limits,
) -> Result<CompactRepresentation, MaltsevError> {
    if let Some((x, y)) = op.maltsev_violation() {
        return Err(MaltsevError::NotMaltsev { x, y });
    }
    let verdict = preserves(op, relation, limits)?;
    if let Some(w) = verdict.witness {
        return Err(MaltsevError::NotInvariant(Box::new(w)));
    }
    let tuples = signature_witnesses(relation.tuples());
    Ok(CompactRepresentation {
        arity: relation.arity(),
        domain: op.domain(),
        signature: signature(relation.tuples()),
        tuples,
        op: op.clone(),
    })
}

/// `⟨S⟩_m`.
pub fn reconstruct(rep: &CompactRepresentation, limits: &Limits) -> Result<Relation, MaltsevError> {
    closure("reconstructed", rep.arity, &rep.tuples, &rep.op, limits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{for_each_tuple, AffineRelation, AffineRow};

    fn z3() -> TotalOperation {
        TotalOperation::affine_maltsev(3)
    }

    #[test]
    fn one_in_three_closes_to_mod3_equation() {
        let gens = [[0, 0, 1], [0, 1, 0], [1, 0, 0]].map(RTuple::from);
        let c = closure("C", 3, &gens, &z3(), &Limits::default()).unwrap();
        assert_eq!(c.len(), 9);
        let mut expected = Vec::new();
        for_each_tuple(DomainSpec::new(3).unwrap(), 3, |t| {
            if t.iter().sum::<u32>() % 3 == 1 {
                expected.push(RTuple(t.to_vec()));
            }
        });
        assert_eq!(c.tuples(), expected.as_slice());
    }

    #[test]
    fn fixed_points() {
        let a = AffineRelation::new(
            "A",
            3,
            3,
            vec![AffineRow {
                coeffs: vec![1, 2, 0],
                rhs: 1,
            }],
        )
        .unwrap();
        let r = a.enumerate(100).unwrap();
        let c = closure("C", 3, r.tuples(), &z3(), &Limits::default()).unwrap();
        assert!(c.same_tuples(&r));
        let single = [RTuple::from([2, 1])];
        assert_eq!(
            closure("C", 2, &single, &z3(), &Limits::default())
                .unwrap()
                .tuples(),
            &single
        );
        assert!(closure("C", 2, &[], &z3(), &Limits::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn closure_under_binary_operation() {
        let max = TotalOperation::from_fn(2, DomainSpec::BOOLEAN, |a| a[0].max(a[1]));
        let gens = [
            RTuple::from([0, 1, 0]),
            RTuple::from([1, 0, 0]),
            RTuple::from([0, 0, 1]),
        ];
        let c = closure("C", 3, &gens, &max, &Limits::default()).unwrap();
        assert_eq!(c.len(), 7);
    }

    #[test]
    fn extract_and_reconstruct() {
        let a = AffineRelation::new(
            "A",
            4,
            3,
            vec![AffineRow {
                coeffs: vec![1, 1, 1, 0],
                rhs: 1,
            }],
        )
        .unwrap();
        let r = a.enumerate(1000).unwrap();
        let rep = extract_compact_representation(&r, &z3(), &Limits::default()).unwrap();
        assert!(rep.len() <= 2 * rep.signature.len());
        assert_eq!(signature(&rep.tuples), rep.signature);
        assert!(reconstruct(&rep, &Limits::default())
            .unwrap()
            .same_tuples(&r));
        // the witness rule is deterministic and idempotent
        assert_eq!(
            extract_compact_representation(&r, &z3(), &Limits::default()).unwrap(),
            rep
        );
        assert_eq!(signature_witnesses(&rep.tuples), rep.tuples);
    }

    #[test]
    fn extract_rejects_non_invariant() {
        let r13 = Relation::new(
            "R",
            DomainSpec::new(3).unwrap(),
            3,
            [[0, 0, 1], [0, 1, 0], [1, 0, 0]].map(RTuple::from),
        )
        .unwrap();
        assert!(matches!(
            extract_compact_representation(&r13, &z3(), &Limits::default()),
            Err(MaltsevError::NotInvariant(_))
        ));
        let maj = TotalOperation::from_fn(3, DomainSpec::BOOLEAN, |a| {
            u32::from(a[0] + a[1] + a[2] >= 2)
        });
        assert!(matches!(
            extract_compact_representation(&r13, &maj, &Limits::default()),
            Err(MaltsevError::NotMaltsev { .. })
        ));
    }

    #[test]
    fn singleton_and_empty_representations() {
        let s = Relation::new("S", DomainSpec::new(3).unwrap(), 2, [RTuple::from([1, 2])]).unwrap();
        let rep = extract_compact_representation(&s, &z3(), &Limits::default()).unwrap();
        assert_eq!(rep.tuples, s.tuples());
        let e = Relation::new("E", DomainSpec::new(3).unwrap(), 2, []).unwrap();
        let rep = extract_compact_representation(&e, &z3(), &Limits::default()).unwrap();
        assert!(rep.is_empty());
        assert!(reconstruct(&rep, &Limits::default()).unwrap().is_empty());
    }

    #[test]
    fn caps() {
        let gens = [[0, 0, 1, 0, 0], [0, 1, 0, 0, 1], [1, 0, 0, 1, 0]].map(RTuple::from);
        let tight = Limits {
            tuples: 5,
            ..Limits::default()
        };
        assert!(matches!(
            closure("C", 5, &gens, &z3(), &tight),
            Err(MaltsevError::LimitExceeded { .. })
        ));
        let tight = Limits {
            applications: 10,
            ..Limits::default()
        };
        assert!(matches!(
            closure("C", 5, &gens, &z3(), &tight),
            Err(MaltsevError::LimitExceeded { .. })
        ));
    }
}
