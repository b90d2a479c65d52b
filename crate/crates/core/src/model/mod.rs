//! Relations, languages and instances.
//!
//! Domain elements are dense integers `0..d`; the Boolean core `{0, 1}` is
//! always the first two elements, so a relation over `{0,1}` is also a
//! relation over any larger domain.

mod text;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::modp;

pub use text::{
    parse_instance, parse_language, serialize_instance, serialize_language, ParseError,
};

pub type Value = u32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("domain size must be at least 2, got {0}")]
    DomainTooSmall(u32),
    #[error("arity must be at least 1")]
    ZeroArity,
    #[error("tuple {tuple:?} has arity {got}, expected {expected}")]
    ArityMismatch {
        tuple: Vec<Value>,
        got: usize,
        expected: usize,
    },
    #[error("value {value} is outside the domain of size {domain}")]
    ValueOutOfRange { value: Value, domain: u32 },
    #[error("modulus {0} is not prime")]
    NotPrime(u32),
    #[error("affine row has {got} coefficients, expected {expected}")]
    RowLength { got: usize, expected: usize },
    #[error("relation {name} is over a domain of size {got}, language domain is {expected}")]
    DomainMismatch {
        name: String,
        got: u32,
        expected: u32,
    },
    #[error("duplicate relation name {0}")]
    DuplicateRelation(String),
    #[error("unknown relation {0}")]
    UnknownRelation(String),
    #[error(
        "constraint {index} on {relation}: scope length {got} does not match arity {expected}"
    )]
    ScopeArity {
        index: usize,
        relation: String,
        got: usize,
        expected: usize,
    },
    #[error("constraint {index}: variable {var} out of range (vars {n})")]
    VariableOutOfRange { index: usize, var: usize, n: usize },
    #[error("materializing {name} would produce {size} tuples (cap {cap})")]
    TooLarge { name: String, size: u128, cap: u64 },
}

/// A finite domain `{0, …, size-1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DomainSpec(u32);

impl DomainSpec {
    pub const BOOLEAN: DomainSpec = DomainSpec(2);

    pub fn new(size: u32) -> Result<Self, ModelError> {
        if size < 2 {
            return Err(ModelError::DomainTooSmall(size));
        }
        Ok(DomainSpec(size))
    }

    pub fn size(self) -> u32 {
        self.0
    }

    pub fn contains(self, v: Value) -> bool {
        v < self.0
    }

    pub fn is_boolean(self) -> bool {
        self.0 == 2
    }

    pub fn elements(self) -> std::ops::Range<Value> {
        0..self.0
    }

    /// `size^n`, saturating.
    pub fn power(self, n: usize) -> u128 {
        (self.0 as u128).checked_pow(n as u32).unwrap_or(u128::MAX)
    }
}

/// A tuple of domain elements.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RTuple(pub Vec<Value>);

impl RTuple {
    pub fn arity(&self) -> usize {
        self.0.len()
    }

    pub fn project(&self, coords: &[usize]) -> RTuple {
        RTuple(coords.iter().map(|&i| self.0[i]).collect())
    }
}

impl Deref for RTuple {
    type Target = [Value];
    fn deref(&self) -> &[Value] {
        &self.0
    }
}

impl From<Vec<Value>> for RTuple {
    fn from(v: Vec<Value>) -> Self {
        RTuple(v)
    }
}

impl<const N: usize> From<[Value; N]> for RTuple {
    fn from(v: [Value; N]) -> Self {
        RTuple(v.to_vec())
    }
}

impl fmt::Display for RTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// Calls `f` on every tuple of `domain^arity` in lexicographic order.
pub fn for_each_tuple(domain: DomainSpec, arity: usize, mut f: impl FnMut(&[Value])) {
    let d = domain.size();
    let mut t = vec![0 as Value; arity];
    loop {
        f(&t);
        let mut i = arity;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if t[i] < d {
                break;
            }
            t[i] = 0;
        }
    }
}

/// An explicit relation: a sorted, duplicate-free list of tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    name: String,
    arity: usize,
    domain: DomainSpec,
    tuples: Vec<RTuple>,
}

impl Relation {
    pub fn new(
        name: impl Into<String>,
        domain: DomainSpec,
        arity: usize,
        tuples: impl IntoIterator<Item = RTuple>,
    ) -> Result<Self, ModelError> {
        if arity == 0 {
            return Err(ModelError::ZeroArity);
        }
        let mut tuples: Vec<RTuple> = tuples.into_iter().collect();
        for t in &tuples {
            if t.arity() != arity {
                return Err(ModelError::ArityMismatch {
                    tuple: t.0.clone(),
                    got: t.arity(),
                    expected: arity,
                });
            }
            if let Some(&v) = t.iter().find(|&&v| !domain.contains(v)) {
                return Err(ModelError::ValueOutOfRange {
                    value: v,
                    domain: domain.size(),
                });
            }
        }
        tuples.sort();
        tuples.dedup();
        Ok(Relation {
            name: name.into(),
            arity,
            domain,
            tuples,
        })
    }

    /// Builds a relation from tuples that are already known to be valid.
    pub(crate) fn from_sorted_unchecked(
        name: String,
        domain: DomainSpec,
        arity: usize,
        tuples: Vec<RTuple>,
    ) -> Self {
        debug_assert!(tuples.windows(2).all(|w| w[0] < w[1]));
        Relation {
            name,
            arity,
            domain,
            tuples,
        }
    }

    /// `{t ∈ domain^arity : pred(t)}`.
    pub fn from_predicate(
        name: impl Into<String>,
        domain: DomainSpec,
        arity: usize,
        mut pred: impl FnMut(&[Value]) -> bool,
    ) -> Result<Self, ModelError> {
        if arity == 0 {
            return Err(ModelError::ZeroArity);
        }
        let mut tuples = Vec::new();
        for_each_tuple(domain, arity, |t| {
            if pred(t) {
                tuples.push(RTuple(t.to_vec()));
            }
        });
        Ok(Relation {
            name: name.into(),
            arity,
            domain,
            tuples,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn tuples(&self) -> &[RTuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, t: &[Value]) -> bool {
        self.tuples
            .binary_search_by(|x| x.0.as_slice().cmp(t))
            .is_ok()
    }

    /// Same tuple set, ignoring name and domain.
    pub fn same_tuples(&self, other: &Relation) -> bool {
        self.arity == other.arity && self.tuples == other.tuples
    }

    /// Restriction to tuples whose entries all lie in `sub`.
    pub fn restrict_domain(&self, sub: DomainSpec) -> Relation {
        let tuples = self
            .tuples
            .iter()
            .filter(|t| t.iter().all(|&v| sub.contains(v)))
            .cloned()
            .collect();
        Relation {
            name: self.name.clone(),
            arity: self.arity,
            domain: sub,
            tuples,
        }
    }
}

/// One row `coeffs · x ≡ rhs (mod p)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AffineRow {
    pub coeffs: Vec<u32>,
    pub rhs: u32,
}

/// The solution set of a linear system over Z_p, kept in reduced row-echelon
/// form so that equal solution sets have identical rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineRelation {
    name: String,
    arity: usize,
    modulus: u32,
    rows: Vec<AffineRow>,
}

impl AffineRelation {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        modulus: u32,
        rows: Vec<AffineRow>,
    ) -> Result<Self, ModelError> {
        if arity == 0 {
            return Err(ModelError::ZeroArity);
        }
        if !modp::is_prime(modulus) {
            return Err(ModelError::NotPrime(modulus));
        }
        let mut mat = Vec::with_capacity(rows.len());
        for row in rows {
            if row.coeffs.len() != arity {
                return Err(ModelError::RowLength {
                    got: row.coeffs.len(),
                    expected: arity,
                });
            }
            let mut r: Vec<u32> = row.coeffs.iter().map(|&c| c % modulus).collect();
            r.push(row.rhs % modulus);
            mat.push(r);
        }
        Ok(Self::from_matrix(name.into(), arity, modulus, mat))
    }

    /// Rows given as augmented vectors `[c_1 … c_r | b]` with entries < p.
    pub(crate) fn from_matrix(
        name: String,
        arity: usize,
        modulus: u32,
        mut mat: Vec<Vec<u32>>,
    ) -> Self {
        modp::rref(&mut mat, arity, modulus);
        let rows = mat
            .into_iter()
            .map(|mut r| {
                let rhs = r.pop().unwrap();
                AffineRow { coeffs: r, rhs }
            })
            .collect();
        AffineRelation {
            name,
            arity,
            modulus,
            rows,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn domain(&self) -> DomainSpec {
        DomainSpec(self.modulus)
    }

    pub fn rows(&self) -> &[AffineRow] {
        &self.rows
    }

    /// True when the system is inconsistent, i.e. the relation is empty.
    pub fn is_inconsistent(&self) -> bool {
        self.rows
            .last()
            .is_some_and(|r| r.coeffs.iter().all(|&c| c == 0))
    }

    pub fn contains(&self, t: &[Value]) -> bool {
        t.len() == self.arity
            && t.iter().all(|&v| v < self.modulus)
            && self
                .rows
                .iter()
                .all(|r| modp::dot(&r.coeffs, t, self.modulus) == r.rhs)
    }

    /// Number of solutions, `p^(arity - rank)` or 0.
    pub fn solution_count(&self) -> u128 {
        if self.is_inconsistent() {
            return 0;
        }
        (self.modulus as u128).pow((self.arity - self.rows.len()) as u32)
    }

    /// Lists all solutions in lexicographic order.
    pub fn enumerate(&self, cap: u64) -> Result<Relation, ModelError> {
        let size = self.solution_count();
        if size > cap as u128 {
            return Err(ModelError::TooLarge {
                name: self.name.clone(),
                size,
                cap,
            });
        }
        let p = self.modulus;
        let mut tuples = Vec::with_capacity(size as usize);
        if size > 0 {
            let pivots = modp::pivot_columns(
                &self
                    .rows
                    .iter()
                    .map(|r| r.coeffs.clone())
                    .collect::<Vec<_>>(),
                self.arity,
            );
            let free: Vec<usize> = (0..self.arity).filter(|c| !pivots.contains(c)).collect();
            let free_dom = DomainSpec(p);
            for_each_tuple(free_dom, free.len(), |vals| {
                let mut t = vec![0u32; self.arity];
                for (&c, &v) in free.iter().zip(vals) {
                    t[c] = v;
                }
                for (row, &pc) in self.rows.iter().zip(&pivots) {
                    // pivot coefficient is 1, other pivot columns are zero
                    let rest = modp::dot(&row.coeffs, &t, p);
                    t[pc] = modp::sub(row.rhs, rest, p);
                }
                tuples.push(RTuple(t));
            });
            tuples.sort();
        }
        Ok(Relation::from_sorted_unchecked(
            self.name.clone(),
            DomainSpec(p),
            self.arity,
            tuples,
        ))
    }
}

/// A relation of a language, either explicit or affine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum LangRelation {
    Explicit(Relation),
    Affine(AffineRelation),
}

impl LangRelation {
    pub fn name(&self) -> &str {
        match self {
            LangRelation::Explicit(r) => r.name(),
            LangRelation::Affine(a) => a.name(),
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            LangRelation::Explicit(r) => r.arity(),
            LangRelation::Affine(a) => a.arity(),
        }
    }

    pub fn domain(&self) -> DomainSpec {
        match self {
            LangRelation::Explicit(r) => r.domain(),
            LangRelation::Affine(a) => a.domain(),
        }
    }

    pub fn contains(&self, t: &[Value]) -> bool {
        match self {
            LangRelation::Explicit(r) => r.contains(t),
            LangRelation::Affine(a) => a.contains(t),
        }
    }

    pub fn materialize(&self, cap: u64) -> Result<Relation, ModelError> {
        match self {
            LangRelation::Explicit(r) => Ok(r.clone()),
            LangRelation::Affine(a) => a.enumerate(cap),
        }
    }
}

impl From<Relation> for LangRelation {
    fn from(r: Relation) -> Self {
        LangRelation::Explicit(r)
    }
}

impl From<AffineRelation> for LangRelation {
    fn from(a: AffineRelation) -> Self {
        LangRelation::Affine(a)
    }
}

/// A finite constraint language over one domain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Language {
    domain: DomainSpec,
    relations: BTreeMap<String, LangRelation>,
}

impl Language {
    pub fn new(domain: DomainSpec) -> Self {
        Language {
            domain,
            relations: BTreeMap::new(),
        }
    }

    pub fn with_relations(
        domain: DomainSpec,
        rels: impl IntoIterator<Item = LangRelation>,
    ) -> Result<Self, ModelError> {
        let mut lang = Language::new(domain);
        for r in rels {
            lang.add(r)?;
        }
        Ok(lang)
    }

    pub fn add(&mut self, rel: impl Into<LangRelation>) -> Result<(), ModelError> {
        let rel = rel.into();
        if rel.domain() != self.domain {
            return Err(ModelError::DomainMismatch {
                name: rel.name().to_string(),
                got: rel.domain().size(),
                expected: self.domain.size(),
            });
        }
        let name = rel.name().to_string();
        if self.relations.contains_key(&name) {
            return Err(ModelError::DuplicateRelation(name));
        }
        self.relations.insert(name, rel);
        Ok(())
    }

    pub fn domain(&self) -> DomainSpec {
        self.domain
    }

    pub fn get(&self, name: &str) -> Option<&LangRelation> {
        self.relations.get(name)
    }

    pub fn relation(&self, name: &str) -> Result<&LangRelation, ModelError> {
        self.get(name)
            .ok_or_else(|| ModelError::UnknownRelation(name.to_string()))
    }

    /// Relations in name order.
    pub fn relations(&self) -> impl Iterator<Item = &LangRelation> {
        self.relations.values()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.relations.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.relations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    /// All relations as explicit tuple sets.
    pub fn materialize(&self, cap: u64) -> Result<Vec<Relation>, ModelError> {
        self.relations().map(|r| r.materialize(cap)).collect()
    }
}

/// A constraint application `R(v_1, …, v_r)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Constraint {
    pub relation: String,
    pub scope: Vec<usize>,
}

impl Constraint {
    pub fn new(relation: impl Into<String>, scope: Vec<usize>) -> Self {
        Constraint {
            relation: relation.into(),
            scope,
        }
    }
}

/// A CSP instance: `num_vars` variables and an ordered list of constraints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    num_vars: usize,
    constraints: Vec<Constraint>,
}

impl Instance {
    /// Builds an instance and checks it against `language`.
    pub fn new(
        num_vars: usize,
        constraints: Vec<Constraint>,
        language: &Language,
    ) -> Result<Self, ModelError> {
        let inst = Instance {
            num_vars,
            constraints,
        };
        inst.validate(language)?;
        Ok(inst)
    }

    pub(crate) fn new_unchecked(num_vars: usize, constraints: Vec<Constraint>) -> Self {
        Instance {
            num_vars,
            constraints,
        }
    }

    pub fn validate(&self, language: &Language) -> Result<(), ModelError> {
        for (index, c) in self.constraints.iter().enumerate() {
            let rel = language.relation(&c.relation)?;
            if rel.arity() != c.scope.len() {
                return Err(ModelError::ScopeArity {
                    index,
                    relation: c.relation.clone(),
                    got: c.scope.len(),
                    expected: rel.arity(),
                });
            }
            if let Some(&var) = c.scope.iter().find(|&&v| v >= self.num_vars) {
                return Err(ModelError::VariableOutOfRange {
                    index,
                    var,
                    n: self.num_vars,
                });
            }
        }
        Ok(())
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn len(&self) -> usize {
        self.constraints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.constraints.is_empty()
    }

    /// The sub-instance with the constraints at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Instance {
        Instance {
            num_vars: self.num_vars,
            constraints: indices
                .iter()
                .map(|&i| self.constraints[i].clone())
                .collect(),
        }
    }

    /// Reorders constraints: position `i` of the result is constraint `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> Instance {
        self.select(order)
    }

    /// Does `assignment` satisfy every constraint?
    pub fn satisfied_by(&self, language: &Language, assignment: &[Value]) -> bool {
        let mut buf = Vec::new();
        self.constraints.iter().all(|c| {
            buf.clear();
            buf.extend(c.scope.iter().map(|&v| assignment[v]));
            language.get(&c.relation).is_some_and(|r| r.contains(&buf))
        })
    }
}

/// The set of satisfying assignments of an instance, as `n`-ary tuples.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub num_vars: usize,
    pub assignments: Vec<RTuple>,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    pub fn contains(&self, t: &[Value]) -> bool {
        self.assignments
            .binary_search_by(|x| x.0.as_slice().cmp(t))
            .is_ok()
    }
}
