//! Degree-c extensions: variables become monomials `∏_{v∈S} x_v` over
//! subsets `S` of size at most `c`.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::limits::Limits;
use crate::model::{
    for_each_tuple, Constraint, DomainSpec, Instance, Language, RTuple, Relation, Value,
};
use crate::modp;

/// All subsets of `{0, …, n-1}` of size at most `c`, by size and then
/// lexicographically; the empty set first when included.
pub fn monomial_subsets(n: usize, c: usize, include_empty: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if include_empty {
        out.push(Vec::new());
    }
    for size in 1..=c.min(n) {
        let mut s: Vec<usize> = (0..size).collect();
        loop {
            out.push(s.clone());
            // advance to the next size-`size` subset in lex order
            let Some(i) = (0..size).rev().find(|&i| s[i] < n - size + i) else {
                break;
            };
            s[i] += 1;
            for j in i + 1..size {
                s[j] = s[j - 1] + 1;
            }
        }
    }
    out
}

fn binomial_sum(n: usize, c: usize) -> u128 {
    let mut total = 0u128;
    let mut b = 1u128;
    for i in 0..=c.min(n) {
        total += b;
        b = b * (n - i) as u128 / (i + 1) as u128;
    }
    total
}

/// Extension variable index ↔ subset of original variables.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialMap {
    n: usize,
    c: usize,
    include_empty: bool,
    subsets: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashMap<Vec<usize>, usize>,
}

impl MonomialMap {
    pub fn new(
        n: usize,
        c: usize,
        include_empty: bool,
        limits: &Limits,
    ) -> Result<Self, KernelError> {
        if c < 1 {
            return Err(KernelError::InvalidArgument(
                "extension degree must be at least 1".into(),
            ));
        }
        let size = binomial_sum(n, c) - u128::from(!include_empty);
        if size > limits.tuples as u128 {
            return Err(KernelError::LimitExceeded {
                what: "monomial variables",
                cap: limits.tuples,
            });
        }
        let subsets = monomial_subsets(n, c, include_empty);
        let index = subsets.iter().cloned().zip(0..).collect();
        Ok(MonomialMap {
            n,
            c,
            include_empty,
            subsets,
            index,
        })
    }

    pub fn num_original(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.c
    }

    pub fn includes_empty(&self) -> bool {
        self.include_empty
    }

    pub fn len(&self) -> usize {
        self.subsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsets.is_empty()
    }

    pub fn subsets(&self) -> &[Vec<usize>] {
        &self.subsets
    }

    /// Index of a subset given in any order, possibly with repeats.
    pub fn index_of(&self, vars: &[usize]) -> Option<usize> {
        let mut key = vars.to_vec();
        key.sort_unstable();
        key.dedup();
        self.index.get(&key).copied()
    }

    /// `g'(S) = ∏_{v∈S} g(v)`.
    pub fn extend_assignment(&self, g: &[Value]) -> Vec<Value> {
        extend_tuple(g, &self.subsets)
    }
}

/// `ť[i] = ∏_{j∈S_i} t[j]`.
pub fn extend_tuple(t: &[Value], subsets: &[Vec<usize>]) -> Vec<Value> {
    subsets
        .iter()
        .map(|s| s.iter().map(|&j| t[j]).product())
        .collect()
}

/// How a scope with repeated variables is read: `pattern[i]` is the index of
/// `scope[i]` among the distinct variables in order of first occurrence.
pub(crate) fn scope_pattern(scope: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut distinct: Vec<usize> = Vec::new();
    let pattern = scope
        .iter()
        .map(|v| {
            distinct.iter().position(|d| d == v).unwrap_or_else(|| {
                distinct.push(*v);
                distinct.len() - 1
            })
        })
        .collect();
    (distinct, pattern)
}

/// `{s ∈ {0,1}^m : (s[pattern[0]], …) ∈ R}`, sorted.
pub(crate) fn collapse(relation: &Relation, pattern: &[usize], m: usize) -> Vec<RTuple> {
    let mut out: Vec<RTuple> = relation
        .tuples()
        .iter()
        .filter_map(|t| {
            let mut s = vec![u32::MAX; m];
            for (&v, &pi) in t.iter().zip(pattern) {
                if s[pi] != u32::MAX && s[pi] != v {
                    return None;
                }
                s[pi] = v;
            }
            Some(RTuple(s))
        })
        .collect();
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtendOptions {
    pub include_empty: bool,
    /// Largest number of distinct variables in one scope.
    pub max_scope: usize,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        ExtendOptions {
            include_empty: true,
            max_scope: 16,
        }
    }
}

/// One extended relation per (relation, repeat pattern) pair.
#[derive(Debug, Clone)]
pub(crate) struct ExtendedForm {
    pub name: String,
    pub m: usize,
    pub local: Vec<Vec<usize>>,
    /// `{s : s consistent with R}` over the distinct variables.
    pub collapsed: Vec<RTuple>,
    pub extended: Vec<RTuple>,
}

pub(crate) fn extended_name(relation: &str, c: usize, pattern: &[usize]) -> String {
    let repeats = pattern.iter().enumerate().any(|(i, &p)| p != i);
    if repeats {
        let pat: Vec<String> = pattern.iter().map(usize::to_string).collect();
        format!("{relation}^{c}~{}", pat.join("."))
    } else {
        format!("{relation}^{c}")
    }
}

pub(crate) struct Extension {
    pub map: MonomialMap,
    pub forms: BTreeMap<String, ExtendedForm>,
    /// Per constraint: the extended relation name and its scope.
    pub constraints: Vec<Constraint>,
}

pub(crate) fn build_extension(
    instance: &Instance,
    language: &Language,
    c: usize,
    options: &ExtendOptions,
    limits: &Limits,
) -> Result<Extension, KernelError> {
    if !language.domain().is_boolean() {
        return Err(KernelError::InvalidArgument(
            "degree extensions need a Boolean language".into(),
        ));
    }
    let map = MonomialMap::new(instance.num_vars(), c, options.include_empty, limits)?;
    let mut forms: BTreeMap<String, ExtendedForm> = BTreeMap::new();
    let mut constraints = Vec::with_capacity(instance.len());
    for con in instance.constraints() {
        let (distinct, pattern) = scope_pattern(&con.scope);
        let m = distinct.len();
        if m > options.max_scope {
            return Err(KernelError::InvalidArgument(format!(
                "scope of {} has {m} distinct variables, cap is {}",
                con.relation, options.max_scope
            )));
        }
        let name = extended_name(&con.relation, c, &pattern);
        let local = monomial_subsets(m, c, options.include_empty);
        if !forms.contains_key(&name) {
            let rel = language
                .relation(&con.relation)?
                .materialize(limits.tuples)?;
            let collapsed = collapse(&rel, &pattern, m);
            let mut extended: Vec<RTuple> = collapsed
                .iter()
                .map(|s| RTuple(extend_tuple(s, &local)))
                .collect();
            extended.sort();
            forms.insert(
                name.clone(),
                ExtendedForm {
                    name: name.clone(),
                    m,
                    local: local.clone(),
                    collapsed,
                    extended,
                },
            );
        }
        let scope = local
            .iter()
            .map(|s| {
                let vars: Vec<usize> = s.iter().map(|&j| distinct[j]).collect();
                map.index_of(&vars).expect("subset of size at most c")
            })
            .collect();
        constraints.push(Constraint::new(name, scope));
    }
    Ok(Extension {
        map,
        forms,
        constraints,
    })
}

/// Replaces every constraint `R(x₁…x_m)` by `Ř(X₁…X_l)` over the monomial
/// variables of its scope, with `Ř = {ť : t ∈ R}`. Repeated variables are
/// collapsed first.
pub fn degree_extend(
    instance: &Instance,
    language: &Language,
    c: usize,
    options: &ExtendOptions,
    limits: &Limits,
) -> Result<(Instance, Language, MonomialMap), KernelError> {
    let ext = build_extension(instance, language, c, options, limits)?;
    let mut out_lang = Language::new(DomainSpec::BOOLEAN);
    for form in ext.forms.values() {
        out_lang.add(Relation::new(
            form.name.clone(),
            DomainSpec::BOOLEAN,
            form.local.len(),
            form.extended.clone(),
        )?)?;
    }
    let out = Instance::new(ext.map.len(), ext.constraints, &out_lang)?;
    Ok((out, out_lang, ext.map))
}

/// The smallest coset of `Z_p^l` through `points`, as a point plus an RREF
/// basis of directions.
#[derive(Debug, Clone)]
pub(crate) struct ParamHull {
    p: u32,
    point: Vec<u32>,
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

impl ParamHull {
    pub fn new(points: &[RTuple], p: u32) -> Option<Self> {
        let first = points.first()?;
        let l = first.arity();
        let mut basis: Vec<Vec<u32>> = points[1..]
            .iter()
            .map(|t| {
                t.iter()
                    .zip(first.iter())
                    .map(|(&a, &b)| modp::sub(a % p, b % p, p))
                    .collect()
            })
            .collect();
        let pivots = modp::rref(&mut basis, l, p);
        Some(ParamHull {
            p,
            point: first.iter().map(|&v| v % p).collect(),
            basis,
            pivots,
        })
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[Value]) -> bool {
        let mut d: Vec<u32> = v
            .iter()
            .zip(&self.point)
            .map(|(&a, &b)| modp::sub(a % self.p, b, self.p))
            .collect();
        modp::reduce_by_basis(&mut d, &self.basis, &self.pivots, self.p);
        d.iter().all(|&x| x == 0)
    }

    /// Coordinate `col` of `point + Σ λ_i basis_i`.
    fn coord(&self, lambda: &[u32], col: usize) -> u32 {
        let mut acc = self.point[col];
        for (l, b) in lambda.iter().zip(&self.basis) {
            acc = modp::add(acc, modp::mul(*l, b[col], self.p), self.p);
        }
        acc
    }

    /// Calls `f` with a coordinate oracle for every hull point that is
    /// Boolean at the pivot columns (a superset of the Boolean points: the
    /// RREF basis makes coordinate `pivot_i` equal to `point + λ_i`, leaving
    /// two choices per `λ_i`); stops early when `f` returns false.
    fn for_each_boolean_candidate(&self, mut f: impl FnMut(&dyn Fn(usize) -> u32) -> bool) {
        let choices: Vec<[u32; 2]> = self
            .pivots
            .iter()
            .map(|&c| {
                [
                    modp::sub(0, self.point[c], self.p),
                    modp::sub(1, self.point[c], self.p),
                ]
            })
            .collect();
        let k = self.dimension();
        let mut lambda = vec![0u32; k];
        for mask in 0u64..(1u64 << k) {
            for (i, l) in lambda.iter_mut().enumerate() {
                *l = choices[i][(mask >> i & 1) as usize];
            }
            if !f(&|col| self.coord(&lambda, col)) {
                return;
            }
        }
    }
}

/// Is the affine hull over `Z_p` of the Boolean relation `tuples` free of
/// other Boolean points? Decided by whichever of the cube `{0,1}^r` and the
/// hull is smaller.
pub(crate) fn hull_is_boolean_exact(
    tuples: &[RTuple],
    arity: usize,
    p: u32,
    limits: &Limits,
) -> Result<bool, KernelError> {
    let Some(hull) = ParamHull::new(tuples, p) else {
        return Ok(true);
    };
    if p == 2 {
        // over Z_2 every hull point is Boolean
        let dim = hull.dimension();
        return Ok(dim < 64 && 1u128 << dim == tuples.len() as u128);
    }
    let (cube, candidates) = (arity as u32, hull.dimension() as u32);
    if cube.min(candidates) >= 63 || 1u64 << cube.min(candidates) > limits.tuples {
        return Err(KernelError::LimitExceeded {
            what: "affine hull check",
            cap: limits.tuples,
        });
    }
    if cube <= candidates {
        let mut exact = true;
        for_each_tuple(DomainSpec::BOOLEAN, arity, |t| {
            if exact
                && hull.contains(t)
                && tuples.binary_search_by(|x| x.0.as_slice().cmp(t)).is_err()
            {
                exact = false;
            }
        });
        return Ok(exact);
    }
    let mut exact = true;
    let mut buf = vec![0u32; arity];
    hull.for_each_boolean_candidate(|coord| {
        for (col, slot) in buf.iter_mut().enumerate() {
            let v = coord(col);
            if v > 1 {
                return true;
            }
            *slot = v;
        }
        exact = tuples
            .binary_search_by(|x| x.0.as_slice().cmp(&buf))
            .is_ok();
        exact
    });
    Ok(exact)
}

/// Is `{ť : s ∈ collapsed}` exactly the set of consistent extensions in its
/// affine hull over `Z_p`? That is, `s ∈ R ⇔ š ∈ hull` for every Boolean `s`.
pub(crate) fn hull_is_extension_exact(
    collapsed: &[RTuple],
    m: usize,
    local: &[Vec<usize>],
    p: u32,
    limits: &Limits,
) -> Result<bool, KernelError> {
    let extended: Vec<RTuple> = collapsed
        .iter()
        .map(|s| RTuple(extend_tuple(s, local)))
        .collect();
    let Some(hull) = ParamHull::new(&extended, p) else {
        return Ok(true);
    };
    let singles: Vec<Option<usize>> = (0..m)
        .map(|j| local.iter().position(|s| s == &[j]))
        .collect();
    if singles.iter().any(Option::is_none) {
        return Err(KernelError::InvalidArgument(
            "extension lacks the degree-1 monomials".into(),
        ));
    }
    let (cube, candidates) = (m as u32, hull.dimension() as u32);
    if cube.min(candidates) >= 63 || 1u64 << cube.min(candidates) > limits.tuples {
        return Err(KernelError::LimitExceeded {
            what: "extension hull check",
            cap: limits.tuples,
        });
    }
    let member = |s: &[Value]| {
        collapsed
            .binary_search_by(|x| x.0.as_slice().cmp(s))
            .is_ok()
    };
    let mut exact = true;
    if cube <= candidates {
        for_each_tuple(DomainSpec::BOOLEAN, m, |s| {
            if exact && !member(s) && hull.contains(&extend_tuple(s, local)) {
                exact = false;
            }
        });
        return Ok(exact);
    }
    let mut s = vec![0u32; m];
    hull.for_each_boolean_candidate(|coord| {
        for (j, slot) in s.iter_mut().enumerate() {
            let v = coord(singles[j].expect("checked"));
            if v > 1 {
                return true;
            }
            *slot = v;
        }
        let consistent = local
            .iter()
            .enumerate()
            .all(|(col, set)| coord(col) == set.iter().map(|&j| s[j]).product::<u32>());
        if consistent && !member(&s) {
            exact = false;
        }
        exact
    });
    Ok(exact)
}
