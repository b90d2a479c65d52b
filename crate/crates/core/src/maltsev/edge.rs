//! k-edge operations and the auxiliary terms `d`, `p`, `s` of their clones.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::MaltsevError;
use crate::algebra::TotalOperation;
use crate::limits::Limits;
use crate::model::{for_each_tuple, Value};

/// A `(k+1)`-ary operation with
/// `e(x,x,y,…,y) = e(x,y,x,y,…,y) = y` and `e(y,…,y,x,y,…,y) = y` for `x`
/// at any position from the fourth on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeOperation {
    k: usize,
    e: TotalOperation,
}

/// The argument tuple of identity `which` (0-based: the two special rows,
/// then one row per position ≥ 4) at `(x, y)`.
fn identity_args(k: usize, which: usize, x: Value, y: Value) -> Vec<Value> {
    let mut a = vec![y; k + 1];
    match which {
        0 => {
            a[0] = x;
            a[1] = x;
        }
        1 => {
            a[0] = x;
            a[2] = x;
        }
        i => a[i + 1] = x,
    }
    a
}

impl EdgeOperation {
    pub fn new(k: usize, e: TotalOperation) -> Result<Self, MaltsevError> {
        if k < 2 || e.arity() != k + 1 {
            return Err(MaltsevError::InvalidArgument(format!(
                "a {k}-edge operation needs arity {}",
                k + 1
            )));
        }
        let d = e.domain();
        for which in 0..k {
            for x in d.elements() {
                for y in d.elements() {
                    let args = identity_args(k, which, x, y);
                    if e.get(&args) != y {
                        return Err(MaltsevError::NotEdge { k, args });
                    }
                }
            }
        }
        Ok(EdgeOperation { k, e })
    }

    /// `e(x, y, z) = m(y, x, z)`.
    pub fn from_maltsev(m: &TotalOperation) -> Result<Self, MaltsevError> {
        if let Some((x, y)) = m.maltsev_violation() {
            return Err(MaltsevError::NotMaltsev { x, y });
        }
        let e = TotalOperation::from_fn(3, m.domain(), |a| m.get3(a[1], a[0], a[2]));
        Self::new(2, e)
    }

    /// `e(x1, x2, x3, x4) = M(x2, x3, x4)` for a majority operation `M`.
    pub fn from_majority(m: &TotalOperation) -> Result<Self, MaltsevError> {
        if m.arity() != 3 {
            return Err(MaltsevError::InvalidArgument(
                "majority operations are ternary".into(),
            ));
        }
        let e = TotalOperation::from_fn(4, m.domain(), |a| m.get3(a[1], a[2], a[3]));
        Self::new(3, e)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn op(&self) -> &TotalOperation {
        &self.e
    }
}

/// Binary `d`, ternary `p` and `k`-ary `s` in the clone of a k-edge
/// operation with `p(x,y,y) = x`, `p(x,x,y) = d(x,y)`, `d(x,d(x,y)) = d(x,y)`,
/// `s(x,y,…,y) = d(y,x)` and `s = y` whenever a single `x` sits at a
/// position from the second on.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeTerms {
    pub d: TotalOperation,
    pub p: Option<TotalOperation>,
    pub s: Option<TotalOperation>,
}

impl EdgeTerms {
    /// `d = π2`, `p = m`, `s = π1`.
    pub fn for_maltsev(m: &TotalOperation) -> Self {
        let dom = m.domain();
        EdgeTerms {
            d: TotalOperation::projection(2, 1, dom),
            p: Some(m.clone()),
            s: Some(TotalOperation::projection(2, 0, dom)),
        }
    }

    /// Checks every stated identity; `p` and `s` only when present.
    pub fn audit(&self, k: usize) -> Result<(), MaltsevError> {
        let d = &self.d;
        if d.arity() != 2 {
            return Err(MaltsevError::EdgeTerms("d must be binary".into()));
        }
        if let Some((x, y)) = d_violation(d) {
            return Err(MaltsevError::EdgeTerms(format!(
                "d(x,d(x,y)) != d(x,y) at x={x}, y={y}"
            )));
        }
        if let Some(p) = &self.p {
            if let Some((x, y)) = p_violation(p, d) {
                return Err(MaltsevError::EdgeTerms(format!(
                    "p identities fail at x={x}, y={y}"
                )));
            }
        }
        if let Some(s) = &self.s {
            if let Some((x, y)) = s_violation(s, d, k) {
                return Err(MaltsevError::EdgeTerms(format!(
                    "s identities fail at x={x}, y={y}"
                )));
            }
        }
        Ok(())
    }
}

fn pairs(d: &TotalOperation) -> impl Iterator<Item = (Value, Value)> {
    let dom = d.domain();
    dom.elements()
        .flat_map(move |x| dom.elements().map(move |y| (x, y)))
}

fn d_violation(d: &TotalOperation) -> Option<(Value, Value)> {
    pairs(d).find(|&(x, y)| d.get(&[x, d.get(&[x, y])]) != d.get(&[x, y]))
}

fn p_violation(p: &TotalOperation, d: &TotalOperation) -> Option<(Value, Value)> {
    if p.arity() != 3 {
        return Some((0, 0));
    }
    pairs(d).find(|&(x, y)| p.get3(x, y, y) != x || p.get3(x, x, y) != d.get(&[x, y]))
}

fn s_violation(s: &TotalOperation, d: &TotalOperation, k: usize) -> Option<(Value, Value)> {
    if s.arity() != k {
        return Some((0, 0));
    }
    pairs(d).find(|&(x, y)| {
        let mut a = vec![y; k];
        a[0] = x;
        if s.get(&a) != d.get(&[y, x]) {
            return true;
        }
        (1..k).any(|i| {
            let mut a = vec![y; k];
            a[i] = x;
            s.get(&a) != y
        })
    })
}

/// Next tuple of `[0, bound)^len` in lexicographic order.
fn next_choice(choice: &mut [usize], bound: usize) -> bool {
    for c in choice.iter_mut().rev() {
        *c += 1;
        if *c < bound {
            return true;
        }
        *c = 0;
    }
    false
}

/// Breadth-first enumeration of the `arity`-ary members of the clone of `e`,
/// by term depth, stopping at the first one accepted by `accept`.
fn search_clone(
    e: &TotalOperation,
    arity: usize,
    max_depth: usize,
    limits: &Limits,
    mut accept: impl FnMut(&TotalOperation) -> bool,
) -> Result<Option<TotalOperation>, MaltsevError> {
    let dom = e.domain();
    let mut known: Vec<TotalOperation> = Vec::new();
    let mut seen: HashSet<Vec<Value>> = HashSet::new();
    for i in 0..arity {
        let pi = TotalOperation::projection(arity, i, dom);
        if accept(&pi) {
            return Ok(Some(pi));
        }
        if seen.insert(pi.table().to_vec()) {
            known.push(pi);
        }
    }
    let size = dom.power(arity) as u64;
    let ea = e.arity();
    let mut work = 0u64;
    let mut level_start = 0;
    for _ in 0..max_depth {
        let level_end = known.len();
        let mut fresh = Vec::new();
        let mut choice = vec![0usize; ea];
        loop {
            if choice.iter().any(|&c| c >= level_start) {
                work = work.saturating_add(size);
                if work > limits.applications {
                    return Err(MaltsevError::LimitExceeded {
                        what: "edge term search",
                        cap: limits.applications,
                    });
                }
                let mut args = vec![0; ea];
                let table: Vec<Value> = (0..size as usize)
                    .map(|r| {
                        for (a, &c) in args.iter_mut().zip(&choice) {
                            *a = known[c].table()[r];
                        }
                        e.get(&args)
                    })
                    .collect();
                if seen.insert(table.clone()) {
                    let f = TotalOperation::new(arity, dom, table).expect("values come from e");
                    if accept(&f) {
                        return Ok(Some(f));
                    }
                    if seen.len() as u64 > limits.terms {
                        return Err(MaltsevError::LimitExceeded {
                            what: "edge term search",
                            cap: limits.terms,
                        });
                    }
                    fresh.push(f);
                }
            }
            if !next_choice(&mut choice, level_end) {
                break;
            }
        }
        if fresh.is_empty() {
            break;
        }
        level_start = level_end;
        known.extend(fresh);
    }
    Ok(None)
}

/// Looks for `d`, `p` and `s` among clone members of term depth at most
/// `max_depth`.
pub fn search_edge_terms(
    edge: &EdgeOperation,
    max_depth: usize,
    limits: &Limits,
) -> Result<EdgeTerms, MaltsevError> {
    let e = edge.op();
    let dom = e.domain();
    let k = edge.k();
    // every p with a usable d, in search order; each d is then tried for s
    let mut candidates: Vec<(TotalOperation, TotalOperation)> = Vec::new();
    search_clone(e, 3, max_depth, limits, |p| {
        let d = TotalOperation::from_fn(2, dom, |a| p.get3(a[0], a[0], a[1]));
        if p_violation(p, &d).is_none()
            && d_violation(&d).is_none()
            && !candidates.iter().any(|(_, known)| *known == d)
        {
            candidates.push((p.clone(), d));
        }
        false
    })?;
    for (p, d) in candidates {
        if let Some(s) = search_clone(e, k, max_depth, limits, |s| s_violation(s, &d, k).is_none())?
        {
            let terms = EdgeTerms {
                d,
                p: Some(p),
                s: Some(s),
            };
            terms.audit(k)?;
            return Ok(terms);
        }
    }
    Err(MaltsevError::EdgeTerms(format!(
        "no d, p, s found up to depth {max_depth}"
    )))
}

/// `f(x, …, x) = x` for every `x`.
pub fn is_idempotent(op: &TotalOperation) -> bool {
    let mut ok = true;
    for_each_tuple(op.domain(), 1, |x| {
        let args = vec![x[0]; op.arity()];
        ok &= op.get(&args) == x[0];
    });
    ok
}
