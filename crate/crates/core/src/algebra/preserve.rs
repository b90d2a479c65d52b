//! Exhaustive polymorphism and partial-polymorphism checks.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use super::operation::{apply_componentwise, Operation, PartialOperation, TotalOperation};
use super::AlgebraError;
use crate::limits::Limits;
use crate::model::{Language, RTuple, Relation, Value};

/// A sequence `t_1 … t_n` of tuples of a relation together with the
/// componentwise image that falls outside it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Witness {
    pub tuples: Vec<RTuple>,
    pub output: RTuple,
}

impl Witness {
    /// Re-applies `op` and confirms the output leaves `relation`.
    pub fn recheck<O: Operation + ?Sized>(&self, op: &O, relation: &Relation) -> bool {
        let refs: Vec<&[Value]> = self.tuples.iter().map(|t| t.0.as_slice()).collect();
        self.tuples.iter().all(|t| relation.contains(t))
            && matches!(apply_componentwise(op, &refs), Ok(Some(out)) if out == self.output && !relation.contains(&out))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservationVerdict {
    pub preserved: bool,
    /// Name of the failing relation when checking a whole language.
    pub relation: Option<String>,
    pub witness: Option<Witness>,
}

impl PreservationVerdict {
    fn preserved() -> Self {
        PreservationVerdict {
            preserved: true,
            relation: None,
            witness: None,
        }
    }

    fn violated(relation: &Relation, witness: Witness) -> Self {
        PreservationVerdict {
            preserved: false,
            relation: Some(relation.name().to_string()),
            witness: Some(witness),
        }
    }
}

/// Incremental view of which column prefixes can still be completed to an
/// argument tuple inside the operation's domain.
enum PrefixIndex {
    /// Total operation: every prefix is live, the state is the partial rank.
    Dense { d: u64, table: Vec<Value> },
    /// Partial operation: a trie over the domain tuples.
    Trie {
        children: Vec<HashMap<Value, u64>>,
        leaf: HashMap<u64, Value>,
    },
}

impl PrefixIndex {
    fn total(op: &TotalOperation) -> Self {
        PrefixIndex::Dense {
            d: op.domain().size() as u64,
            table: op.table().to_vec(),
        }
    }

    fn partial(op: &PartialOperation) -> Self {
        let mut children: Vec<HashMap<Value, u64>> = vec![HashMap::new()];
        let mut leaf = HashMap::new();
        for (args, &v) in op.defined() {
            let mut node = 0u64;
            for &a in args {
                let next = children.len() as u64;
                node = *children[node as usize].entry(a).or_insert(next);
                if node == next {
                    children.push(HashMap::new());
                }
            }
            leaf.insert(node, v);
        }
        PrefixIndex::Trie { children, leaf }
    }

    #[inline]
    fn child(&self, state: u64, v: Value) -> Option<u64> {
        match self {
            PrefixIndex::Dense { d, .. } => Some(state * d + v as u64),
            PrefixIndex::Trie { children, .. } => children[state as usize].get(&v).copied(),
        }
    }

    #[inline]
    fn value(&self, state: u64) -> Value {
        match self {
            PrefixIndex::Dense { table, .. } => table[state as usize],
            PrefixIndex::Trie { leaf, .. } => leaf[&state],
        }
    }
}

/// Depth-first search over tuple sequences in lexicographic order of tuple
/// indices, pruning as soon as a column leaves the operation's domain. The
/// first violation found is therefore the lexicographically least one.
fn search(
    index: &PrefixIndex,
    arity: usize,
    relation: &Relation,
    cap: u64,
) -> Result<Option<Witness>, AlgebraError> {
    let tuples = relation.tuples();
    let width = relation.arity();
    let mut visited = 0u64;
    let mut chosen: Vec<usize> = Vec::with_capacity(arity);
    // states[j] holds the per-column trie state after j chosen tuples
    let mut states: Vec<Vec<u64>> = vec![vec![0; width]; arity + 1];
    let mut next = vec![0usize; arity + 1];
    let mut out = vec![0 as Value; width];

    if tuples.is_empty() || arity == 0 {
        return Ok(None);
    }
    let mut depth = 0usize;
    loop {
        if depth == arity {
            for (o, &s) in out.iter_mut().zip(&states[arity]) {
                *o = index.value(s);
            }
            if !relation.contains(&out) {
                return Ok(Some(Witness {
                    tuples: chosen.iter().map(|&i| tuples[i].clone()).collect(),
                    output: RTuple(out),
                }));
            }
            depth -= 1;
            chosen.pop();
            continue;
        }
        let i = next[depth];
        if i == tuples.len() {
            next[depth] = 0;
            if depth == 0 {
                return Ok(None);
            }
            depth -= 1;
            chosen.pop();
            continue;
        }
        next[depth] = i + 1;
        visited += 1;
        if visited > cap {
            return Err(AlgebraError::LimitExceeded {
                what: "preservation checks",
                cap,
            });
        }
        let (lo, hi) = states.split_at_mut(depth + 1);
        let cur = &lo[depth];
        let nxt = &mut hi[0];
        let mut live = true;
        for col in 0..width {
            match index.child(cur[col], tuples[i][col]) {
                Some(s) => nxt[col] = s,
                None => {
                    live = false;
                    break;
                }
            }
        }
        if live {
            chosen.push(i);
            depth += 1;
        }
    }
}

/// Is `op` a polymorphism of `relation`? Checks all `|R|^k` sequences.
pub fn preserves(
    op: &TotalOperation,
    relation: &Relation,
    limits: &Limits,
) -> Result<PreservationVerdict, AlgebraError> {
    if op.domain().size() < relation.domain().size() {
        return Err(AlgebraError::DomainMismatch {
            op: op.domain().size(),
            relation: relation.domain().size(),
        });
    }
    let sequences = (relation.len() as u128).saturating_pow(op.arity() as u32);
    if sequences > limits.preservation_checks as u128 {
        return Err(AlgebraError::LimitExceeded {
            what: "preservation checks",
            cap: limits.preservation_checks,
        });
    }
    let index = PrefixIndex::total(op);
    // the node count of a full search is below 2·|R|^k
    let found = search(
        &index,
        op.arity(),
        relation,
        limits.preservation_checks.saturating_mul(2),
    )?;
    Ok(found.map_or_else(PreservationVerdict::preserved, |w| {
        PreservationVerdict::violated(relation, w)
    }))
}

/// Is the partial operation a partial polymorphism of `relation`?
pub fn partial_preserves(
    op: &PartialOperation,
    relation: &Relation,
    limits: &Limits,
) -> Result<PreservationVerdict, AlgebraError> {
    if op.domain().size() < relation.domain().size()
        && relation
            .tuples()
            .iter()
            .any(|t| t.iter().any(|&v| !op.domain().contains(v)))
    {
        return Err(AlgebraError::DomainMismatch {
            op: op.domain().size(),
            relation: relation.domain().size(),
        });
    }
    let index = PrefixIndex::partial(op);
    if let Some(factors) = product_factors(op, relation)? {
        let mut all = true;
        for f in &factors {
            if search(&index, op.arity(), f, limits.preservation_checks)?.is_some() {
                all = false;
                break;
            }
        }
        if all {
            return Ok(PreservationVerdict::preserved());
        }
    }
    let found = search(&index, op.arity(), relation, limits.preservation_checks)?;
    Ok(found.map_or_else(PreservationVerdict::preserved, |w| {
        PreservationVerdict::violated(relation, w)
    }))
}

fn project(tuples: &[Vec<Value>], coords: &[usize]) -> BTreeSet<Vec<Value>> {
    tuples
        .iter()
        .map(|t| coords.iter().map(|&c| t[c]).collect())
        .collect()
}

/// Splits `relation` as `pr_{i_1} R × … × pr_{i_s} R × pr_rest R` by peeling
/// coordinates that are independent of all others. Returns `None` when
/// nothing splits, or when `op` is undefined on some constant tuple: a
/// partial operation defined on every `(a, …, a)` preserves a product of
/// nonempty relations exactly when it preserves each factor.
fn product_factors(
    op: &PartialOperation,
    relation: &Relation,
) -> Result<Option<Vec<Relation>>, AlgebraError> {
    if relation.arity() < 2 || relation.len() < 2 {
        return Ok(None);
    }
    let values: BTreeSet<Value> = relation
        .tuples()
        .iter()
        .flat_map(|t| t.iter().copied())
        .collect();
    if values
        .iter()
        .any(|&a| op.apply(&vec![a; op.arity()]).is_none())
    {
        return Ok(None);
    }
    let mut rest: Vec<usize> = (0..relation.arity()).collect();
    let mut current: Vec<Vec<Value>> = relation.tuples().iter().map(|t| t.0.clone()).collect();
    let mut singles = Vec::new();
    let mut peeled = true;
    while peeled && rest.len() > 1 {
        peeled = false;
        for pos in 0..rest.len() {
            let others: Vec<usize> = (0..rest.len()).filter(|&j| j != pos).collect();
            let mine = project(&current, &[pos]);
            let theirs = project(&current, &others);
            if mine.len() * theirs.len() == current.len() {
                singles.push((rest.remove(pos), mine));
                current = theirs.into_iter().collect();
                peeled = true;
                break;
            }
        }
    }
    if singles.is_empty() {
        return Ok(None);
    }
    let d = relation.domain();
    let mut factors = Vec::with_capacity(singles.len() + 1);
    for (c, vals) in singles {
        factors.push(Relation::new(
            format!("{}#{c}", relation.name()),
            d,
            1,
            vals.into_iter().map(RTuple),
        )?);
    }
    factors.push(Relation::new(
        format!("{}#rest", relation.name()),
        d,
        rest.len(),
        current.into_iter().map(RTuple),
    )?);
    Ok(Some(factors))
}

/// Total-operation check over every relation of a language; stops at the
/// first failing relation (in name order).
pub fn preserves_language(
    op: &TotalOperation,
    language: &Language,
    limits: &Limits,
) -> Result<PreservationVerdict, AlgebraError> {
    for rel in language.relations() {
        let rel = rel.materialize(limits.tuples)?;
        let v = preserves(op, &rel, limits)?;
        if !v.preserved {
            return Ok(v);
        }
    }
    Ok(PreservationVerdict::preserved())
}

pub fn partial_preserves_language(
    op: &PartialOperation,
    language: &Language,
    limits: &Limits,
) -> Result<PreservationVerdict, AlgebraError> {
    for rel in language.relations() {
        let rel = rel.materialize(limits.tuples)?;
        let v = partial_preserves(op, &rel, limits)?;
        if !v.preserved {
            return Ok(v);
        }
    }
    Ok(PreservationVerdict::preserved())
}
