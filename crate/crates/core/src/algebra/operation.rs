use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AlgebraError;
use crate::model::{for_each_tuple, DomainSpec, RTuple, Value};

/// Anything that can be applied to an argument tuple, possibly undefined.
pub trait Operation {
    fn arity(&self) -> usize;
    fn domain(&self) -> DomainSpec;
    fn apply(&self, args: &[Value]) -> Option<Value>;
}

/// A total operation `D^k → D`, stored as a dense table indexed by the
/// mixed-radix rank of the argument tuple (first argument most significant).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TotalOperation {
    arity: usize,
    domain: DomainSpec,
    table: Vec<Value>,
}

impl fmt::Debug for TotalOperation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "TotalOperation(arity={}, d={}, {:?})",
            self.arity,
            self.domain.size(),
            self.table
        )
    }
}

impl TotalOperation {
    pub fn new(arity: usize, domain: DomainSpec, table: Vec<Value>) -> Result<Self, AlgebraError> {
        let expected = domain.power(arity);
        if table.len() as u128 != expected {
            return Err(AlgebraError::TableSize {
                got: table.len(),
                expected,
            });
        }
        if let Some(&v) = table.iter().find(|&&v| !domain.contains(v)) {
            return Err(AlgebraError::ValueOutOfRange {
                value: v,
                domain: domain.size(),
            });
        }
        Ok(TotalOperation {
            arity,
            domain,
            table,
        })
    }

    pub fn from_fn(arity: usize, domain: DomainSpec, mut f: impl FnMut(&[Value]) -> Value) -> Self {
        let mut table = Vec::with_capacity(domain.power(arity) as usize);
        for_each_tuple(domain, arity, |args| table.push(f(args)));
        TotalOperation {
            arity,
            domain,
            table,
        }
    }

    /// `π_i^k`, 0-based `i`.
    pub fn projection(arity: usize, i: usize, domain: DomainSpec) -> Self {
        Self::from_fn(arity, domain, |a| a[i])
    }

    /// `x − y + z (mod p)`, the coset generating operation of `Z_p`.
    pub fn affine_maltsev(p: u32) -> Self {
        let d = DomainSpec::new(p).expect("modulus at least 2");
        Self::from_fn(3, d, |a| (a[0] + p - a[1] + a[2]) % p)
    }

    pub fn constant(arity: usize, value: Value, domain: DomainSpec) -> Self {
        Self::from_fn(arity, domain, |_| value)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn table(&self) -> &[Value] {
        &self.table
    }

    pub fn rank(&self, args: &[Value]) -> usize {
        let d = self.domain.size() as usize;
        args.iter().fold(0usize, |acc, &v| acc * d + v as usize)
    }

    pub fn get(&self, args: &[Value]) -> Value {
        self.table[self.rank(args)]
    }

    pub fn get3(&self, x: Value, y: Value, z: Value) -> Value {
        let d = self.domain.size() as usize;
        self.table[(x as usize * d + y as usize) * d + z as usize]
    }

    /// `m(x,x,y) = y` and `m(x,y,y) = x` for all x, y.
    pub fn is_maltsev(&self) -> bool {
        self.maltsev_violation().is_none()
    }

    /// First `(x, y)` breaking one of the Maltsev identities.
    pub fn maltsev_violation(&self) -> Option<(Value, Value)> {
        if self.arity != 3 {
            return Some((0, 0));
        }
        for x in self.domain.elements() {
            for y in self.domain.elements() {
                if self.get3(x, x, y) != y || self.get3(x, y, y) != x {
                    return Some((x, y));
                }
            }
        }
        None
    }

    /// Composition `self(g_1, …, g_m)` where all `g_i` share an arity.
    pub fn compose(&self, inner: &[&TotalOperation]) -> Result<TotalOperation, AlgebraError> {
        if inner.len() != self.arity {
            return Err(AlgebraError::ArityMismatch {
                expected: self.arity,
                got: inner.len(),
            });
        }
        let k = inner.first().map_or(0, |g| g.arity);
        let mut args = vec![0; self.arity];
        Ok(Self::from_fn(k, self.domain, |x| {
            for (a, g) in args.iter_mut().zip(inner) {
                *a = g.get(x);
            }
            self.get(&args)
        }))
    }
}

impl Operation for TotalOperation {
    fn arity(&self) -> usize {
        self.arity
    }
    fn domain(&self) -> DomainSpec {
        self.domain
    }
    fn apply(&self, args: &[Value]) -> Option<Value> {
        Some(self.get(args))
    }
}

/// A partial operation: a finite map from a subset of `D^k` to `D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialOperation {
    arity: usize,
    domain: DomainSpec,
    defined: BTreeMap<Vec<Value>, Value>,
}

impl PartialOperation {
    pub fn new(
        arity: usize,
        domain: DomainSpec,
        defined: BTreeMap<Vec<Value>, Value>,
    ) -> Result<Self, AlgebraError> {
        for (args, &v) in &defined {
            if args.len() != arity {
                return Err(AlgebraError::ArityMismatch {
                    expected: arity,
                    got: args.len(),
                });
            }
            if let Some(&bad) = args
                .iter()
                .chain(std::iter::once(&v))
                .find(|&&x| !domain.contains(x))
            {
                return Err(AlgebraError::ValueOutOfRange {
                    value: bad,
                    domain: domain.size(),
                });
            }
        }
        Ok(PartialOperation {
            arity,
            domain,
            defined,
        })
    }

    /// The total operation viewed as a partial one defined everywhere.
    pub fn from_total(op: &TotalOperation) -> Self {
        let mut defined = BTreeMap::new();
        for_each_tuple(op.domain, op.arity, |a| {
            defined.insert(a.to_vec(), op.get(a));
        });
        PartialOperation {
            arity: op.arity,
            domain: op.domain,
            defined,
        }
    }

    /// The first partial Maltsev operation: `(x,y,y) ↦ x`, `(x,x,y) ↦ y` on `{0,1}`.
    pub fn malt1() -> Self {
        let mut defined = BTreeMap::new();
        for x in 0..2 {
            for y in 0..2 {
                defined.insert(vec![x, y, y], x);
                defined.insert(vec![x, x, y], y);
            }
        }
        PartialOperation {
            arity: 3,
            domain: DomainSpec::BOOLEAN,
            defined,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn defined(&self) -> &BTreeMap<Vec<Value>, Value> {
        &self.defined
    }

    /// `domain(f)` in lexicographic order.
    pub fn domain_tuples(&self) -> impl Iterator<Item = &[Value]> {
        self.defined.keys().map(Vec::as_slice)
    }

    pub fn domain_size(&self) -> usize {
        self.defined.len()
    }

    pub fn is_total(&self) -> bool {
        self.defined.len() as u128 == self.domain.power(self.arity)
    }

    /// `self` is a subfunction of `other`: same arity, `dom(self) ⊆ dom(other)`
    /// and the values agree on `dom(self)`.
    pub fn is_subfunction_of(&self, other: &PartialOperation) -> bool {
        self.arity == other.arity
            && self.defined.len() <= other.defined.len()
            && self
                .defined
                .iter()
                .all(|(k, v)| other.defined.get(k) == Some(v))
    }
}

impl Operation for PartialOperation {
    fn arity(&self) -> usize {
        self.arity
    }
    fn domain(&self) -> DomainSpec {
        self.domain
    }
    fn apply(&self, args: &[Value]) -> Option<Value> {
        self.defined.get(args).copied()
    }
}

/// Applies `op` column by column to `tuples`. Returns `None` when some column
/// lies outside the domain of a partial operation.
pub fn apply_componentwise<O: Operation + ?Sized>(
    op: &O,
    tuples: &[&[Value]],
) -> Result<Option<RTuple>, AlgebraError> {
    if tuples.len() != op.arity() {
        return Err(AlgebraError::ArityMismatch {
            expected: op.arity(),
            got: tuples.len(),
        });
    }
    let width = tuples.first().map_or(0, |t| t.len());
    if let Some(t) = tuples.iter().find(|t| t.len() != width) {
        return Err(AlgebraError::TupleArity {
            expected: width,
            got: t.len(),
        });
    }
    let mut column = vec![0; tuples.len()];
    let mut out = Vec::with_capacity(width);
    for i in 0..width {
        for (c, t) in column.iter_mut().zip(tuples) {
            *c = t[i];
        }
        match op.apply(&column) {
            Some(v) => out.push(v),
            None => return Ok(None),
        }
    }
    Ok(Some(RTuple(out)))
}

/// Restriction of a total operation over `D ⊇ {0,1}` to the Boolean argument
/// tuples on which it takes a Boolean value.
pub fn restrict_to_boolean(op: &TotalOperation) -> PartialOperation {
    let mut defined = BTreeMap::new();
    for_each_tuple(DomainSpec::BOOLEAN, op.arity, |a| {
        let v = op.get(a);
        if v < 2 {
            defined.insert(a.to_vec(), v);
        }
    });
    PartialOperation {
        arity: op.arity,
        domain: DomainSpec::BOOLEAN,
        defined,
    }
}

/// The seven Boolean operations whose joint failure to preserve a language
/// means its co-clone is all Boolean relations.
pub fn post_lattice_witnesses() -> Vec<(&'static str, TotalOperation)> {
    let b = DomainSpec::BOOLEAN;
    vec![
        ("constant-0", TotalOperation::constant(1, 0, b)),
        ("constant-1", TotalOperation::constant(1, 1, b)),
        ("negation", TotalOperation::from_fn(1, b, |a| 1 - a[0])),
        (
            "conjunction",
            TotalOperation::from_fn(2, b, |a| a[0] & a[1]),
        ),
        (
            "disjunction",
            TotalOperation::from_fn(2, b, |a| a[0] | a[1]),
        ),
        (
            "majority",
            TotalOperation::from_fn(3, b, |a| u32::from(a[0] + a[1] + a[2] >= 2)),
        ),
        (
            "minority",
            TotalOperation::from_fn(3, b, |a| a[0] ^ a[1] ^ a[2]),
        ),
    ]
}
