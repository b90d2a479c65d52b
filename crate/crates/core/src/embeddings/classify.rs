use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::symbolic::{symbolic_maltsev_closure, SymbolicStatus};
use super::{validate_embedding, Embedding, EmbeddingError, OpSpec};
use crate::algebra::{check_malt1, restrict_term, PartialOperation, Term};
use crate::kernelize::{
    hull_is_boolean_exact, hull_is_extension_exact, monomial_subsets, KernelError,
};
use crate::limits::Limits;
use crate::maltsev::affine_hull;
use crate::model::{DomainSpec, Language, RTuple, Relation};
use crate::modp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Term depth of the symbolic closure.
    pub depth: usize,
    /// Largest modulus tried for affine embeddings.
    pub max_prime: u32,
    /// Largest degree tried for extensions.
    pub max_degree: usize,
    pub limits: Limits,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            depth: 2,
            max_prime: 7,
            max_degree: 2,
            limits: Limits::default(),
        }
    }
}

/// A Boolean tuple outside a relation reached by a term over `u`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniversalEvidence {
    pub relation: String,
    pub depth: usize,
    pub term: Term,
    pub leaves: Vec<RTuple>,
    pub output: RTuple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassifierVerdict {
    LinearKernel {
        engine: String,
        modulus: u32,
        embedding: Embedding,
    },
    PolyKernel {
        degree: usize,
        mechanism: String,
        modulus: u32,
    },
    LowerBoundWitness {
        relation: String,
        tuples: Vec<RTuple>,
        output: RTuple,
    },
    Inconclusive {
        depth: usize,
        evidence: Vec<UniversalEvidence>,
        notes: Vec<String>,
    },
}

impl ClassifierVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            ClassifierVerdict::LinearKernel { .. } => "LINEAR_KERNEL",
            ClassifierVerdict::PolyKernel { .. } => "POLY_KERNEL",
            ClassifierVerdict::LowerBoundWitness { .. } => "LOWER_BOUND_WITNESS",
            ClassifierVerdict::Inconclusive { .. } => "INCONCLUSIVE",
        }
    }
}

/// The affine embedding over `Z_p` of every relation of `language`, if each
/// relation's affine hull meets `{0,1}^r` exactly in the relation.
pub fn affine_embedding_search(
    language: &Language,
    p: u32,
    limits: &Limits,
) -> Result<Option<Embedding>, EmbeddingError> {
    let rels = language.materialize(limits.tuples)?;
    for r in &rels {
        if !hull_is_boolean_exact(r.tuples(), r.arity(), p, limits).map_err(from_kernel)? {
            return Ok(None);
        }
    }
    let mut target = Language::new(DomainSpec::new(p)?);
    let mut map = BTreeMap::new();
    for r in &rels {
        let name = format!("{}_hat", r.name());
        target.add(affine_hull(&name, r.arity(), p, r.tuples())?)?;
        map.insert(r.name().to_string(), name);
    }
    Ok(Some(Embedding {
        base: language.clone(),
        target,
        map,
        op: OpSpec::Affine { modulus: p },
    }))
}

/// Does every relation have an exact affine embedding over `Z_p` after the
/// degree-`c` extension?
pub fn degree_extension_exact(
    language: &Language,
    c: usize,
    p: u32,
    limits: &Limits,
) -> Result<bool, EmbeddingError> {
    for r in language.materialize(limits.tuples)? {
        let local = monomial_subsets(r.arity(), c, true);
        let exact = hull_is_extension_exact(r.tuples(), r.arity(), &local, p, limits)
            .map_err(from_kernel)?;
        if !exact {
            return Ok(false);
        }
    }
    Ok(true)
}

fn from_kernel(e: KernelError) -> EmbeddingError {
    match e {
        KernelError::LimitExceeded { what, cap } => EmbeddingError::LimitExceeded { what, cap },
        other => EmbeddingError::InvalidArgument(other.to_string()),
    }
}

fn primes_up_to(max: u32) -> impl Iterator<Item = u32> {
    (2..=max).filter(|&p| modp::is_prime(p))
}

/// malt₁ first (a violation is a lower-bound witness), then affine
/// embeddings over primes up to the cap, then degree extensions, and finally
/// the symbolic closure, whose violations are reported as evidence only.
pub fn classify(
    language: &Language,
    options: &ClassifyOptions,
) -> Result<ClassifierVerdict, EmbeddingError> {
    let limits = &options.limits;
    if !language.domain().is_boolean() {
        return Err(EmbeddingError::InvalidArgument(
            "classification needs a Boolean language".into(),
        ));
    }
    let malt1 = check_malt1(language, limits)?;
    if let (Some(relation), Some(w)) = (malt1.relation, malt1.witness) {
        return Ok(ClassifierVerdict::LowerBoundWitness {
            relation,
            tuples: w.tuples,
            output: w.output,
        });
    }
    for p in primes_up_to(options.max_prime) {
        if let Some(emb) = affine_embedding_search(language, p, limits)? {
            validate_embedding(&emb, limits)?.into_result()?;
            return Ok(ClassifierVerdict::LinearKernel {
                engine: "affine".into(),
                modulus: p,
                embedding: emb,
            });
        }
    }
    for c in 2..=options.max_degree {
        for p in primes_up_to(options.max_prime) {
            if degree_extension_exact(language, c, p, limits)? {
                return Ok(ClassifierVerdict::PolyKernel {
                    degree: c,
                    mechanism: "degree-extension".into(),
                    modulus: p,
                });
            }
        }
    }
    let mut evidence = Vec::new();
    let mut notes = Vec::new();
    for r in language.materialize(limits.tuples)? {
        let report = symbolic_maltsev_closure(&r, options.depth, limits)?;
        match (report.status, report.violation) {
            (SymbolicStatus::Violation, Some(v)) => {
                notes.push(format!(
                    "{}: no Maltsev embedding (universal-operation witness at depth {})",
                    r.name(),
                    v.depth
                ));
                evidence.push(UniversalEvidence {
                    relation: r.name().to_string(),
                    depth: v.depth,
                    term: v.term,
                    leaves: v.leaves,
                    output: v.output,
                });
            }
            _ => notes.push(format!(
                "{}: closed under u up to depth {}",
                r.name(),
                options.depth
            )),
        }
    }
    Ok(ClassifierVerdict::Inconclusive {
        depth: options.depth,
        evidence,
        notes,
    })
}

/// The relation whose columns list the domain of `op`, each argument tuple
/// exactly once and in lexicographic order: tuple `j` holds the `j`-th
/// argument of every domain element.
pub fn domain_relation(op: &PartialOperation, name: &str) -> Relation {
    let columns: Vec<&[u32]> = op.domain_tuples().collect();
    let tuples = (0..op.arity()).map(|j| RTuple(columns.iter().map(|col| col[j]).collect()));
    Relation::new(name, DomainSpec::BOOLEAN, columns.len(), tuples).expect("Boolean columns")
}

/// `u(u(x1,x2,x3), u(x4,x5,x6), u(x7,x8,x9))`.
pub fn malt2_term() -> Term {
    let v = Term::Var;
    Term::app(
        Term::app(v(0), v(1), v(2)),
        Term::app(v(3), v(4), v(5)),
        Term::app(v(6), v(7), v(8)),
    )
}

/// The 9-tuple relation over the domain of malt₂.
pub fn malt2_relation() -> Relation {
    domain_relation(&restrict_term(&malt2_term()), "MALT2")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{partial_preserves, PartialOperation};
    use crate::embeddings::one_in_k_relation;

    fn lang(rels: Vec<Relation>) -> Language {
        Language::with_relations(DomainSpec::BOOLEAN, rels.into_iter().map(Into::into)).unwrap()
    }

    fn mod6(k: usize) -> Relation {
        Relation::from_predicate("R3mod6", DomainSpec::BOOLEAN, k, |t| {
            matches!(t.iter().sum::<u32>() % 6, 1 | 2)
        })
        .unwrap()
    }

    #[test]
    fn one_in_three_is_linear() {
        let v = classify(
            &lang(vec![one_in_k_relation(3)]),
            &ClassifyOptions::default(),
        )
        .unwrap();
        match v {
            ClassifierVerdict::LinearKernel {
                modulus, embedding, ..
            } => {
                assert_eq!(modulus, 3);
                assert!(
                    validate_embedding(&embedding, &Limits::default())
                        .unwrap()
                        .valid
                );
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mod6_has_a_lower_bound_witness() {
        let v = classify(&lang(vec![mod6(3)]), &ClassifyOptions::default()).unwrap();
        assert_eq!(
            v,
            ClassifierVerdict::LowerBoundWitness {
                relation: "R3mod6".into(),
                tuples: vec![
                    RTuple::from([0, 0, 1]),
                    RTuple::from([0, 1, 1]),
                    RTuple::from([0, 1, 0])
                ],
                output: RTuple::from([0, 0, 0]),
            }
        );
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["verdict"], "LOWER_BOUND_WITNESS");
    }

    #[test]
    fn gadget_columns_are_malt1_domain() {
        let r = domain_relation(&PartialOperation::malt1(), "M1");
        assert_eq!(r.arity(), 6);
        assert_eq!(r.len(), 3);
    }

    #[test]
    fn malt2_relation_separates_depths() {
        let r = malt2_relation();
        assert_eq!(r.len(), 9);
        let m1 = partial_preserves(&PartialOperation::malt1(), &r, &Limits::default()).unwrap();
        assert!(m1.preserved);
        let m2 = partial_preserves(&restrict_term(&malt2_term()), &r, &Limits::default()).unwrap();
        assert!(!m2.preserved);
    }

    #[test]
    fn malt2_linear_search_is_inconclusive() {
        let options = ClassifyOptions {
            max_degree: 1,
            ..ClassifyOptions::default()
        };
        let v = classify(&lang(vec![malt2_relation()]), &options).unwrap();
        match v {
            ClassifierVerdict::Inconclusive {
                depth, evidence, ..
            } => {
                assert_eq!(depth, 2);
                assert_eq!(evidence.len(), 1);
                assert_eq!(evidence[0].depth, 2);
                assert!(!malt2_relation().contains(&evidence[0].output));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malt2_has_a_degree_two_extension() {
        let v = classify(&lang(vec![malt2_relation()]), &ClassifyOptions::default()).unwrap();
        assert_eq!(
            v,
            ClassifierVerdict::PolyKernel {
                degree: 2,
                mechanism: "degree-extension".into(),
                modulus: 2
            }
        );
    }

    #[test]
    fn xor_is_linear_over_two() {
        let xor =
            Relation::from_predicate("XOR", DomainSpec::BOOLEAN, 2, |t| t[0] != t[1]).unwrap();
        let v = classify(&lang(vec![xor]), &ClassifyOptions::default()).unwrap();
        assert!(matches!(
            v,
            ClassifierVerdict::LinearKernel { modulus: 2, .. }
        ));
    }

    #[test]
    fn deterministic() {
        let l = lang(vec![one_in_k_relation(3), mod6(4)]);
        let first = classify(&l, &ClassifyOptions::default()).unwrap();
        for _ in 0..3 {
            assert_eq!(classify(&l, &ClassifyOptions::default()).unwrap(), first);
        }
    }
}
