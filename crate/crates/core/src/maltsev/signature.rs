use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::algebra::TotalOperation;
use crate::model::{RTuple, Value};

/// `sig(R)`: triples `(i, a, b)` with `i` a 0-based position such that two
/// tuples agree before `i` and carry `a` and `b` at `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature(pub BTreeSet<(usize, Value, Value)>);

impl Signature {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize, a: Value, b: Value) -> bool {
        self.0.contains(&(i, a, b))
    }

    pub fn is_superset(&self, other: &Signature) -> bool {
        self.0.is_superset(&other.0)
    }

    /// `{(a, b) : (i, a, b) ∈ sig}` for one position.
    pub fn pairs_at(&self, i: usize) -> impl Iterator<Item = (Value, Value)> + '_ {
        self.0
            .range((i, 0, 0)..=(i, Value::MAX, Value::MAX))
            .map(|&(_, a, b)| (a, b))
    }
}

/// Prints positions 1-based, as `{(1,0,0),(1,0,1),…}`.
impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, (i, a, b)) in self.0.iter().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "({},{},{})", i + 1, a, b)?;
        }
        write!(f, "}}")
    }
}

fn sorted_refs(tuples: &[RTuple]) -> Vec<&RTuple> {
    let mut v: Vec<&RTuple> = tuples.iter().collect();
    v.sort();
    v.dedup();
    v
}

/// Calls `visit(i, group)` for every position `i` and every maximal run of
/// sorted tuples sharing the prefix before `i`.
fn for_each_prefix_group<'a>(sorted: &[&'a RTuple], mut visit: impl FnMut(usize, &[&'a RTuple])) {
    let Some(first) = sorted.first() else { return };
    for i in 0..first.arity() {
        let mut start = 0;
        while start < sorted.len() {
            let mut end = start + 1;
            while end < sorted.len() && sorted[end][..i] == sorted[start][..i] {
                end += 1;
            }
            visit(i, &sorted[start..end]);
            start = end;
        }
    }
}

/// Lexicographically least witnessing pair `(t, t')` for each signature
/// entry accepted by `keep`, as indices into `sorted`.
fn witness_pairs<'a>(
    sorted: &[&'a RTuple],
    mut keep: impl FnMut(Value, Value) -> bool,
) -> BTreeMap<(usize, Value, Value), (&'a RTuple, &'a RTuple)> {
    let mut out = BTreeMap::new();
    for_each_prefix_group(sorted, |i, group| {
        let mut first: BTreeMap<Value, &RTuple> = BTreeMap::new();
        for t in group {
            first.entry(t[i]).or_insert(t);
        }
        for (&a, &ta) in &first {
            for (&b, &tb) in &first {
                if keep(a, b) {
                    out.entry((i, a, b)).or_insert((ta, tb));
                }
            }
        }
    });
    out
}

pub fn signature(tuples: &[RTuple]) -> Signature {
    let sorted = sorted_refs(tuples);
    Signature(witness_pairs(&sorted, |_, _| true).into_keys().collect())
}

/// The union of the lexicographically least witnessing pairs, one per entry
/// of `sig(tuples)`, sorted.
pub fn signature_witnesses(tuples: &[RTuple]) -> Vec<RTuple> {
    let sorted = sorted_refs(tuples);
    let mut chosen: BTreeSet<&RTuple> = BTreeSet::new();
    for (ta, tb) in witness_pairs(&sorted, |_, _| true).into_values() {
        chosen.insert(ta);
        chosen.insert(tb);
    }
    chosen.into_iter().cloned().collect()
}

/// `sig_e` restricted to minority pairs together with the projections onto
/// every strictly increasing index list of length below `k`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSignature {
    pub sig: Signature,
    pub proj: BTreeSet<(Vec<usize>, Vec<Value>)>,
}

impl EdgeSignature {
    pub fn is_superset(&self, other: &EdgeSignature) -> bool {
        self.sig.is_superset(&other.sig) && self.proj.is_superset(&other.proj)
    }
}

/// Increasing index lists `I ⊆ {0..n}` with `1 ≤ |I| < k`, by size then lex.
pub fn index_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..k.min(n + 1) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.clone());
            let Some(pos) = (0..size).rev().find(|&j| idx[j] < n - size + j) else {
                break;
            };
            idx[pos] += 1;
            for j in pos + 1..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

fn is_minority(d: &TotalOperation, a: Value, b: Value) -> bool {
    d.get(&[a, b]) == b
}

pub fn edge_signature(tuples: &[RTuple], d: &TotalOperation, k: usize) -> EdgeSignature {
    let sorted = sorted_refs(tuples);
    let sig = Signature(
        witness_pairs(&sorted, |a, b| is_minority(d, a, b))
            .into_keys()
            .collect(),
    );
    let mut proj = BTreeSet::new();
    if let Some(first) = sorted.first() {
        for idx in index_subsets(first.arity(), k) {
            for t in &sorted {
                proj.insert((idx.clone(), idx.iter().map(|&i| t[i]).collect()));
            }
        }
    }
    EdgeSignature { sig, proj }
}

/// Lexicographically least witnesses for every `sig_e` entry and every
/// projection entry, sorted.
pub fn edge_witnesses(tuples: &[RTuple], d: &TotalOperation, k: usize) -> Vec<RTuple> {
    let sorted = sorted_refs(tuples);
    let mut chosen: BTreeSet<&RTuple> = BTreeSet::new();
    for (ta, tb) in witness_pairs(&sorted, |a, b| is_minority(d, a, b)).into_values() {
        chosen.insert(ta);
        chosen.insert(tb);
    }
    if let Some(first) = sorted.first() {
        for idx in index_subsets(first.arity(), k) {
            let mut seen: BTreeSet<Vec<Value>> = BTreeSet::new();
            for &t in &sorted {
                if seen.insert(idx.iter().map(|&i| t[i]).collect()) {
                    chosen.insert(t);
                }
            }
        }
    }
    chosen.into_iter().cloned().collect()
}
