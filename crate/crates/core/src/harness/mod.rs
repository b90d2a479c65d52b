//! Brute-force oracle, equivalence checks and deterministic instance
//! generators.

use std::fmt;
use std::str::FromStr;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::SplitMix64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::embeddings::one_in_k_relation;
use crate::limits::Limits;
use crate::model::{
    Constraint, DomainSpec, Instance, Language, ModelError, RTuple, Relation, SolutionSet, Value,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("{what} exceeded the cap of {cap}")]
    LimitExceeded { what: &'static str, cap: u64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Every assignment satisfying `instance`, in lexicographic order.
///
/// Each constraint is checked as soon as the largest variable of its scope is
/// assigned, so contradictory prefixes are pruned; the cap still applies to
/// the full `|D|^n` space.
pub fn brute_force_solutions(
    instance: &Instance,
    language: &Language,
    limits: &Limits,
) -> Result<SolutionSet, HarnessError> {
    instance.validate(language)?;
    let n = instance.num_vars();
    let d = language.domain();
    if d.power(n) > u128::from(limits.assignments) {
        return Err(HarnessError::LimitExceeded {
            what: "brute-force assignments",
            cap: limits.assignments,
        });
    }
    let mut due: Vec<Vec<usize>> = vec![Vec::new(); n.max(1)];
    let mut always: Vec<usize> = Vec::new();
    for (i, c) in instance.constraints().iter().enumerate() {
        match c.scope.iter().max() {
            Some(&v) => due[v].push(i),
            None => always.push(i),
        }
    }
    let mut assignments = Vec::new();
    let holds = |ci: usize, g: &[Value], buf: &mut Vec<Value>| {
        let c = &instance.constraints()[ci];
        buf.clear();
        buf.extend(c.scope.iter().map(|&v| g[v]));
        language.get(&c.relation).is_some_and(|r| r.contains(buf))
    };
    let mut buf = Vec::new();
    let empty: [Value; 0] = [];
    if !always.iter().all(|&ci| holds(ci, &empty, &mut buf)) {
        return Ok(SolutionSet {
            num_vars: n,
            assignments,
        });
    }
    if n == 0 {
        assignments.push(RTuple(Vec::new()));
        return Ok(SolutionSet {
            num_vars: n,
            assignments,
        });
    }
    let size = d.size();
    let mut g: Vec<Value> = vec![0; n];
    let mut depth = 0usize;
    // Iterative depth-first search: `g[depth]` is the value being tried.
    loop {
        let ok = due[depth].iter().all(|&ci| holds(ci, &g, &mut buf));
        if ok && depth + 1 == n {
            assignments.push(RTuple(g.clone()));
        }
        if ok && depth + 1 < n {
            depth += 1;
            g[depth] = 0;
            continue;
        }
        loop {
            if g[depth] + 1 < size {
                g[depth] += 1;
                break;
            }
            if depth == 0 {
                return Ok(SolutionSet {
                    num_vars: n,
                    assignments,
                });
            }
            g[depth] = 0;
            depth -= 1;
        }
    }
}

/// Do `a` and `b` have the same solution set?
pub fn equivalent(
    a: &Instance,
    b: &Instance,
    language: &Language,
    limits: &Limits,
) -> Result<bool, HarnessError> {
    if a.num_vars() != b.num_vars() {
        return Err(HarnessError::InvalidArgument(format!(
            "instances have {} and {} variables",
            a.num_vars(),
            b.num_vars()
        )));
    }
    Ok(brute_force_solutions(a, language, limits)? == brute_force_solutions(b, language, limits)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Exactly one of `k` variables is true.
    OneInK,
    /// The `k` variables are not all equal.
    NaeK,
    /// The number of true variables is 1 or 2 modulo 6.
    Mod6K,
    /// Two random nonempty Boolean relations of arity `k`.
    RandomLanguage,
}

impl Family {
    pub const ALL: [Family; 4] = [
        Family::OneInK,
        Family::NaeK,
        Family::Mod6K,
        Family::RandomLanguage,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::OneInK => "one-in-k",
            Family::NaeK => "nae-k",
            Family::Mod6K => "mod6-k",
            Family::RandomLanguage => "random-language",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| HarnessError::InvalidArgument(format!("unknown family `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub family: Family,
    /// Arity of every relation.
    pub k: usize,
    /// Number of variables.
    pub n: usize,
    /// Number of constraints.
    pub m: usize,
    pub seed: u64,
}

/// Largest arity accepted by the generators.
pub const MAX_GENERATED_ARITY: usize = 16;

/// The SplitMix64 stream whose initial state is `seed` (increment
/// `0x9e3779b97f4a7c15`, output mixers `0xbf58476d1ce4e5b9` and
/// `0x94d049bb133111eb`).
pub fn rng_for_seed(seed: u64) -> SplitMix64 {
    SplitMix64::from_seed(seed.to_le_bytes())
}

/// A uniform integer in `0..bound` by rejection sampling.
fn below(rng: &mut SplitMix64, bound: u64) -> u64 {
    debug_assert!(bound > 0);
    let zone = u64::MAX - u64::MAX % bound;
    loop {
        let x = rng.next_u64();
        if x < zone {
            return x % bound;
        }
    }
}

/// `k` distinct variables of `0..n` in draw order (partial Fisher-Yates).
fn distinct_scope(rng: &mut SplitMix64, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, (n - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

/// A uniformly random permutation of `0..len` (Fisher-Yates over
/// [`rng_for_seed`]`(seed)`).
pub fn random_permutation(len: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_for_seed(seed);
    let mut order: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = below(&mut rng, i as u64 + 1) as usize;
        order.swap(i, j);
    }
    order
}

pub fn nae_relation(k: usize) -> Relation {
    Relation::from_predicate(format!("NAE{k}"), DomainSpec::BOOLEAN, k, |t| {
        t.iter().any(|&v| v != t[0])
    })
    .expect("Boolean predicate")
}

/// `{t : Σt ∈ {1, 2} (mod 6)}`.
pub fn mod6_relation(k: usize) -> Relation {
    Relation::from_predicate(format!("R{k}mod6"), DomainSpec::BOOLEAN, k, |t| {
        matches!(t.iter().sum::<Value>() % 6, 1 | 2)
    })
    .expect("Boolean predicate")
}

fn random_relation(rng: &mut SplitMix64, name: String, k: usize) -> Relation {
    let total = 1u64 << k;
    loop {
        let mut tuples = Vec::new();
        for code in 0..total {
            if rng.next_u64() >> 63 == 1 {
                tuples.push(RTuple(
                    (0..k).rev().map(|b| ((code >> b) & 1) as Value).collect(),
                ));
            }
        }
        if !tuples.is_empty() {
            return Relation::new(name, DomainSpec::BOOLEAN, k, tuples).expect("Boolean tuples");
        }
    }
}

/// The language and instance described by `spec`. Scopes consist of `k`
/// distinct variables drawn uniformly; every random choice comes from
/// [`rng_for_seed`]`(spec.seed)`, so equal specs give equal output.
pub fn generate(spec: &GeneratorSpec) -> Result<(Language, Instance), HarnessError> {
    let GeneratorSpec {
        family,
        k,
        n,
        m,
        seed,
    } = *spec;
    if k == 0 || k > MAX_GENERATED_ARITY {
        return Err(HarnessError::InvalidArgument(format!(
            "arity k must be in 1..={MAX_GENERATED_ARITY}, got {k}"
        )));
    }
    if n < k {
        return Err(HarnessError::InvalidArgument(format!(
            "{n} variables cannot hold a scope of {k} distinct ones"
        )));
    }
    let mut rng = rng_for_seed(seed);
    let relations = match family {
        Family::OneInK => vec![one_in_k_relation(k)],
        Family::NaeK => vec![nae_relation(k)],
        Family::Mod6K => vec![mod6_relation(k)],
        Family::RandomLanguage => (0..2)
            .map(|i| random_relation(&mut rng, format!("L{i}"), k))
            .collect(),
    };
    let names: Vec<String> = relations.iter().map(|r| r.name().to_string()).collect();
    let language =
        Language::with_relations(DomainSpec::BOOLEAN, relations.into_iter().map(Into::into))?;
    let mut constraints = Vec::with_capacity(m);
    for _ in 0..m {
        let name = if names.len() == 1 {
            &names[0]
        } else {
            &names[below(&mut rng, names.len() as u64) as usize]
        };
        constraints.push(Constraint::new(
            name.clone(),
            distinct_scope(&mut rng, n, k),
        ));
    }
    let instance = Instance::new(n, constraints, &language)?;
    Ok((language, instance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AffineRelation, AffineRow};

    fn one_in_three_lang() -> Language {
        Language::with_relations(DomainSpec::BOOLEAN, [one_in_k_relation(3).into()]).unwrap()
    }

    #[test]
    fn single_one_in_three() {
        let lang = one_in_three_lang();
        let inst = Instance::new(3, vec![Constraint::new("R1in3", vec![0, 1, 2])], &lang).unwrap();
        let sols = brute_force_solutions(&inst, &lang, &Limits::default()).unwrap();
        assert_eq!(
            sols.assignments,
            vec![
                RTuple::from([0, 0, 1]),
                RTuple::from([0, 1, 0]),
                RTuple::from([1, 0, 0])
            ]
        );
    }

    #[test]
    fn no_constraints_and_contradictions() {
        let lang = one_in_three_lang();
        let free = Instance::new(2, vec![], &lang).unwrap();
        assert_eq!(
            brute_force_solutions(&free, &lang, &Limits::default())
                .unwrap()
                .len(),
            4
        );
        // x0 = 1 and x0 = 0 through repeated scopes.
        let contra = Instance::new(
            2,
            vec![
                Constraint::new("R1in3", vec![0, 1, 1]),
                Constraint::new("R1in3", vec![1, 0, 0]),
            ],
            &lang,
        )
        .unwrap();
        assert!(brute_force_solutions(&contra, &lang, &Limits::default())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn matches_naive_filter() {
        let (lang, inst) = generate(&GeneratorSpec {
            family: Family::RandomLanguage,
            k: 3,
            n: 8,
            m: 6,
            seed: 5,
        })
        .unwrap();
        let sols = brute_force_solutions(&inst, &lang, &Limits::default()).unwrap();
        let mut naive = Vec::new();
        crate::model::for_each_tuple(DomainSpec::BOOLEAN, 8, |g| {
            if inst.satisfied_by(&lang, g) {
                naive.push(RTuple(g.to_vec()));
            }
        });
        assert_eq!(sols.assignments, naive);
    }

    #[test]
    fn affine_relations_are_checked_on_the_cube() {
        let row = AffineRow {
            coeffs: vec![1, 1, 1],
            rhs: 1,
        };
        let lin = AffineRelation::new("L", 3, 3, vec![row]).unwrap();
        let lang = Language::with_relations(DomainSpec::new(3).unwrap(), [lin.into()]).unwrap();
        let inst = Instance::new(3, vec![Constraint::new("L", vec![0, 1, 2])], &lang).unwrap();
        assert_eq!(
            brute_force_solutions(&inst, &lang, &Limits::default())
                .unwrap()
                .len(),
            9
        );
    }

    #[test]
    fn cap_is_enforced() {
        let lang = one_in_three_lang();
        let inst = Instance::new(30, vec![], &lang).unwrap();
        assert!(matches!(
            brute_force_solutions(&inst, &lang, &Limits::default()),
            Err(HarnessError::LimitExceeded { .. })
        ));
    }

    #[test]
    fn equivalence_examples() {
        let (lang, inst) = generate(&GeneratorSpec {
            family: Family::OneInK,
            k: 3,
            n: 6,
            m: 4,
            seed: 1,
        })
        .unwrap();
        let limits = Limits::default();
        assert!(equivalent(&inst, &inst, &lang, &limits).unwrap());
        let fewer = inst.select(&[0, 1, 2]);
        let planted =
            Instance::new(6, vec![Constraint::new("R1in3", vec![0, 1, 2])], &lang).unwrap();
        let none = Instance::new(6, vec![], &lang).unwrap();
        assert!(!equivalent(&planted, &none, &lang, &limits).unwrap());
        assert_eq!(
            equivalent(&inst, &fewer, &lang, &limits).unwrap(),
            brute_force_solutions(&fewer, &lang, &limits).unwrap()
                == brute_force_solutions(&inst, &lang, &limits).unwrap()
        );
        let other_n = Instance::new(7, vec![], &lang).unwrap();
        assert!(equivalent(&inst, &other_n, &lang, &limits).is_err());
    }

    #[test]
    fn family_relation_sizes() {
        assert_eq!(mod6_relation(3).len(), 6);
        assert_eq!(nae_relation(3).len(), 6);
        assert!(!nae_relation(3).contains(&[0, 0, 0]));
        assert!(!nae_relation(3).contains(&[1, 1, 1]));
        for k in 1..=8 {
            let expected = (0..=k)
                .filter(|s| matches!(s % 6, 1 | 2))
                .map(|s| binom(k, s))
                .sum::<usize>();
            assert_eq!(mod6_relation(k).len(), expected);
        }
    }

    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn generation_is_reproducible() {
        let spec = GeneratorSpec {
            family: Family::OneInK,
            k: 3,
            n: 30,
            m: 500,
            seed: 42,
        };
        let (lang, inst) = generate(&spec).unwrap();
        assert_eq!(inst.len(), 500);
        assert_eq!(inst.num_vars(), 30);
        assert!(lang.get("R1in3").is_some());
        for c in inst.constraints() {
            let mut s = c.scope.clone();
            s.sort_unstable();
            s.dedup();
            assert_eq!(s.len(), 3);
        }
        assert_eq!(generate(&spec).unwrap(), (lang.clone(), inst.clone()));
        let (_, other) = generate(&GeneratorSpec { seed: 43, ..spec }).unwrap();
        assert_ne!(other, inst);
    }

    #[test]
    fn splitmix_reference_values() {
        // First outputs of splitmix64.c seeded with 1234567.
        let mut rng = rng_for_seed(1234567);
        assert_eq!(rng.next_u64(), 6457827717110365317);
        assert_eq!(rng.next_u64(), 3203168211198807973);
    }

    #[test]
    fn random_language_has_two_nonempty_relations() {
        let (lang, _) = generate(&GeneratorSpec {
            family: Family::RandomLanguage,
            k: 4,
            n: 5,
            m: 3,
            seed: 9,
        })
        .unwrap();
        assert_eq!(lang.names().collect::<Vec<_>>(), ["L0", "L1"]);
        for r in lang.materialize(1 << 10).unwrap() {
            assert!(!r.is_empty());
        }
    }

    #[test]
    fn permutations_are_seeded() {
        let p = random_permutation(50, 7);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..50).collect::<Vec<_>>());
        assert_eq!(random_permutation(50, 7), p);
        assert_ne!(random_permutation(50, 8), p);
        assert!(random_permutation(0, 1).is_empty());
    }

    #[test]
    fn invalid_specs() {
        let bad = |k, n| {
            generate(&GeneratorSpec {
                family: Family::NaeK,
                k,
                n,
                m: 1,
                seed: 0,
            })
        };
        assert!(bad(0, 3).is_err());
        assert!(bad(4, 3).is_err());
        assert!(bad(17, 20).is_err());
        assert!("two-in-k".parse::<Family>().is_err());
        assert_eq!("mod6-k".parse::<Family>().unwrap(), Family::Mod6K);
    }
}
