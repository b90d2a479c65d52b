use serde::{Deserialize, Serialize};

use super::EmbeddingError;
use crate::algebra::TotalOperation;
use crate::model::{DomainSpec, Value};

/// A finite group on `{0, …, order-1}` given by its multiplication table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Group {
    order: u32,
    table: Vec<Value>,
    identity: Value,
    inverse: Vec<Value>,
}

impl Group {
    /// Checks closure, associativity, a two-sided identity and inverses.
    pub fn new(order: u32, table: Vec<Value>) -> Result<Self, EmbeddingError> {
        let n = order as usize;
        if order < 2 || table.len() != n * n {
            return Err(EmbeddingError::Group(format!(
                "a table of order {order} needs {} entries",
                n * n
            )));
        }
        if let Some(&v) = table.iter().find(|&&v| v >= order) {
            return Err(EmbeddingError::Group(format!(
                "entry {v} is outside the group"
            )));
        }
        let mul = |a: Value, b: Value| table[a as usize * n + b as usize];
        for a in 0..order {
            for b in 0..order {
                for c in 0..order {
                    if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                        return Err(EmbeddingError::Group(format!(
                            "not associative at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        let identity = (0..order)
            .find(|&e| (0..order).all(|a| mul(e, a) == a && mul(a, e) == a))
            .ok_or_else(|| EmbeddingError::Group("no identity element".into()))?;
        let mut inverse = Vec::with_capacity(n);
        for a in 0..order {
            let inv = (0..order)
                .find(|&b| mul(a, b) == identity && mul(b, a) == identity)
                .ok_or_else(|| EmbeddingError::Group(format!("{a} has no inverse")))?;
            inverse.push(inv);
        }
        Ok(Group {
            order,
            table,
            identity,
            inverse,
        })
    }

    /// `Z_n` under addition.
    pub fn cyclic(n: u32) -> Self {
        let table = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a + b) % n))
            .collect();
        Group::new(n, table).expect("cyclic group")
    }

    /// `S_n` for `2 ≤ n ≤ 5`: permutations of `0..n` in lexicographic order
    /// (the identity is element 0), composed left to right.
    pub fn symmetric(n: usize) -> Result<Self, EmbeddingError> {
        if !(2..=5).contains(&n) {
            return Err(EmbeddingError::InvalidArgument(format!(
                "symmetric group on {n} points"
            )));
        }
        let mut perms: Vec<Vec<usize>> = vec![(0..n).collect()];
        while let Some(next) = next_permutation(perms.last().expect("nonempty")) {
            perms.push(next);
        }
        let index = |p: &[usize]| {
            perms
                .binary_search_by(|q| q.as_slice().cmp(p))
                .expect("permutation") as Value
        };
        let mut table = Vec::with_capacity(perms.len() * perms.len());
        for a in &perms {
            for b in &perms {
                let ab: Vec<usize> = a.iter().map(|&i| b[i]).collect();
                table.push(index(&ab));
            }
        }
        Group::new(perms.len() as u32, table)
    }

    /// `G × H` with `(g, h)` encoded as `g·|H| + h`.
    pub fn product(g: &Group, h: &Group) -> Self {
        let (m, k) = (g.order, h.order);
        let table = (0..m * k)
            .flat_map(|a| (0..m * k).map(move |b| (a, b)))
            .map(|(a, b)| g.mul(a / k, b / k) * k + h.mul(a % k, b % k))
            .collect();
        Group::new(m * k, table).expect("product of groups")
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn table(&self) -> &[Value] {
        &self.table
    }

    pub fn identity(&self) -> Value {
        self.identity
    }

    pub fn mul(&self, a: Value, b: Value) -> Value {
        self.table[a as usize * self.order as usize + b as usize]
    }

    pub fn inverse(&self, a: Value) -> Value {
        self.inverse[a as usize]
    }

    pub fn is_abelian(&self) -> bool {
        (0..self.order).all(|a| (0..self.order).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    /// `s(x, y, z) = x · y⁻¹ · z`.
    pub fn coset_operation(&self) -> TotalOperation {
        let d = DomainSpec::new(self.order).expect("order at least 2");
        TotalOperation::from_fn(3, d, |a| self.mul(self.mul(a[0], self.inverse(a[1])), a[2]))
    }
}

fn next_permutation(p: &[usize]) -> Option<Vec<usize>> {
    let mut p = p.to_vec();
    let i = (1..p.len()).rev().find(|&i| p[i - 1] < p[i])? - 1;
    let j = (i + 1..p.len())
        .rev()
        .find(|&j| p[j] > p[i])
        .expect("larger element exists");
    p.swap(i, j);
    p[i + 1..].reverse();
    Some(p)
}

/// First `(x, y, z, u)` breaking `m(m(x,y,z), z, u) = m(x,y,u)`.
pub fn coset_identity_violation(m: &TotalOperation) -> Option<[Value; 4]> {
    let d = m.domain();
    for x in d.elements() {
        for y in d.elements() {
            for z in d.elements() {
                for u in d.elements() {
                    if m.get3(m.get3(x, y, z), z, u) != m.get3(x, y, u) {
                        return Some([x, y, z, u]);
                    }
                }
            }
        }
    }
    None
}
