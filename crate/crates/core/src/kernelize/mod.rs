//! Kernelization: keep a constraint only if it is not already entailed by
//! the constraints kept before it.

mod extend;

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, TotalOperation};
use crate::embeddings::{validate_embedding, Embedding, EmbeddingError, OpSpec};
use crate::limits::Limits;
use crate::maltsev::{
    affine_hull, AffineState, EdgeOperation, EdgeTerms, EngineKind, ExplicitEngine, MaltsevError,
};
use crate::model::{AffineRelation, Constraint, Instance, LangRelation, Language, ModelError};
use crate::modp;

pub(crate) use extend::{build_extension, hull_is_boolean_exact, hull_is_extension_exact};
pub use extend::{degree_extend, extend_tuple, monomial_subsets, ExtendOptions, MonomialMap};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("embedding not validated: {0}")]
    Unvalidated(String),
    #[error("engine {engine} cannot run this embedding: {reason}")]
    Unsupported {
        engine: &'static str,
        reason: String,
    },
    #[error("no affine embedding of the extended relation {0}")]
    NoExtensionEmbedding(String),
    #[error("{what} exceeded the cap of {cap}")]
    LimitExceeded { what: &'static str, cap: u64 },
    #[error("{0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Maltsev(#[from] MaltsevError),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineChoice {
    /// Exact coset arithmetic over `Z_p`.
    Affine,
    /// Explicit solution space with signature measure, bound `2·n·|D|`.
    Generic,
    /// The explicit engine under the coset bound `⌊n·log₂|D|⌋ + 1`.
    Coset,
    /// Explicit solution space with the `sig_e ∪ Proj` measure.
    Kedge,
}

impl EngineChoice {
    pub fn name(self) -> &'static str {
        match self {
            EngineChoice::Affine => "affine",
            EngineChoice::Generic => "generic",
            EngineChoice::Coset => "coset",
            EngineChoice::Kedge => "kedge",
        }
    }
}

impl std::str::FromStr for EngineChoice {
    type Err = KernelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "affine" => Ok(EngineChoice::Affine),
            "generic" => Ok(EngineChoice::Generic),
            "coset" => Ok(EngineChoice::Coset),
            "kedge" => Ok(EngineChoice::Kedge),
            other => Err(KernelError::InvalidArgument(format!(
                "unknown engine `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub engine: EngineChoice,
    /// Recompute `⟨S⟩` by closure after every step of the explicit engines.
    pub audit: bool,
    /// Term depth for the search of `d`, `p`, `s` in a k-edge clone.
    pub edge_search_depth: usize,
    pub limits: Limits,
}

impl EngineConfig {
    pub fn new(engine: EngineChoice) -> Self {
        EngineConfig {
            engine,
            audit: false,
            edge_search_depth: 2,
            limits: Limits::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Dim,
    Sig,
    Proj,
}

/// The strict drop of the chain measure caused by a kept constraint; `after`
/// is -1 when the state became empty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainEvent {
    pub constraint: usize,
    pub kind: EventKind,
    pub before: i64,
    pub after: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelReport {
    pub engine: String,
    pub n: usize,
    pub domain: u32,
    pub kept: Vec<usize>,
    pub dropped: Vec<usize>,
    pub unsat: bool,
    pub bound: u64,
    pub chain_events: Vec<ChainEvent>,
    pub wall_ms: u64,
}

impl KernelReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Runs `step` on each constraint in order; `step` returns `None` when the
/// constraint is entailed, otherwise the event of advancing the state.
fn drive(
    instance: &Instance,
    engine: &str,
    n: usize,
    domain: u32,
    bound: u64,
    mut step: impl FnMut(usize, &Constraint) -> Result<Option<ChainEvent>, KernelError>,
) -> Result<(Instance, KernelReport), KernelError> {
    let start = Instant::now();
    let mut report = KernelReport {
        engine: engine.to_string(),
        n,
        domain,
        kept: Vec::new(),
        dropped: Vec::new(),
        unsat: false,
        bound,
        chain_events: Vec::new(),
        wall_ms: 0,
    };
    for (i, c) in instance.constraints().iter().enumerate() {
        if report.unsat {
            report.dropped.push(i);
            continue;
        }
        match step(i, c)? {
            None => report.dropped.push(i),
            Some(event) => {
                report.unsat = event.after < 0;
                report.kept.push(i);
                report.chain_events.push(event);
            }
        }
    }
    report.wall_ms = start.elapsed().as_millis() as u64;
    Ok((instance.select(&report.kept), report))
}

/// `⌊n·log₂ d⌋ + 1` computed without floating-point error at powers of two.
fn coset_bound(n: usize, d: u32) -> u64 {
    // largest b with 2^b ≤ d^n
    let mut acc: u128 = 1;
    let mut overflow_bits = 0u64;
    for _ in 0..n {
        acc *= d as u128;
        while acc >= 1 << 64 {
            acc >>= 1;
            overflow_bits += 1;
        }
    }
    overflow_bits + (127 - acc.leading_zeros()) as u64 + 1
}

/// The kernel-size bound of an engine: `n + 1` (affine), `2·n·|D|`
/// (generic), `⌊n·log₂|D|⌋ + 1` (coset). The k-edge bound depends on the
/// operation and is only known from a run.
pub fn chain_bound(engine: EngineChoice, n: usize, domain_size: u32) -> Option<u64> {
    match engine {
        EngineChoice::Affine => Some(n as u64 + 1),
        EngineChoice::Generic => Some(2 * n as u64 * domain_size as u64),
        EngineChoice::Coset => Some(coset_bound(n, domain_size)),
        EngineChoice::Kedge => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainAudit {
    pub pass: bool,
    pub kept: usize,
    pub bound: u64,
}

/// PASS iff the number of kept constraints is within the engine's bound.
pub fn chain_audit(
    report: &KernelReport,
    domain_size: u32,
    n: usize,
    engine: EngineChoice,
) -> ChainAudit {
    let bound = chain_bound(engine, n, domain_size).unwrap_or(report.bound);
    ChainAudit {
        pass: report.kept.len() as u64 <= bound,
        kept: report.kept.len(),
        bound,
    }
}

fn ensure_valid(
    instance: &Instance,
    embedding: &Embedding,
    limits: &Limits,
) -> Result<(), KernelError> {
    instance.validate(&embedding.base)?;
    let report = validate_embedding(embedding, limits)?;
    report.into_result().map_err(|e| match e {
        EmbeddingError::Unvalidated(msg) => KernelError::Unvalidated(msg),
        other => other.into(),
    })
}

/// The modulus `p` when the embedding's operation is `x − y + z mod p`.
fn affine_modulus(op: &OpSpec) -> Option<u32> {
    match op {
        OpSpec::Affine { modulus } => Some(*modulus),
        OpSpec::Symbolic { .. } => None,
        other => {
            let m = other.operation()?;
            let p = m.domain().size();
            (modp::is_prime(p) && m.arity() == 3 && m == TotalOperation::affine_maltsev(p))
                .then_some(p)
        }
    }
}

/// The image of a relation as a linear system over `Z_p`.
fn as_affine(image: &LangRelation, p: u32) -> Result<AffineRelation, KernelError> {
    match image {
        LangRelation::Affine(a) if a.modulus() == p => Ok(a.clone()),
        LangRelation::Affine(a) => Err(KernelError::Unsupported {
            engine: "affine",
            reason: format!(
                "{} is over Z_{}, the operation over Z_{p}",
                a.name(),
                a.modulus()
            ),
        }),
        LangRelation::Explicit(r) => {
            let hull = affine_hull(r.name(), r.arity(), p, r.tuples())?;
            if hull.solution_count() != r.len() as u128 {
                return Err(KernelError::Unsupported {
                    engine: "affine",
                    reason: format!("{} is not a coset of Z_{p}^{}", r.name(), r.arity()),
                });
            }
            Ok(hull)
        }
    }
}

fn affine_step(
    state: &mut AffineState,
    i: usize,
    rel: &AffineRelation,
    scope: &[usize],
) -> Result<Option<ChainEvent>, KernelError> {
    if state.entails(rel, scope)? {
        return Ok(None);
    }
    let before = state.dimension().map_or(-1, |d| d as i64);
    *state = state.intersect(rel, scope)?;
    let after = state.dimension().map_or(-1, |d| d as i64);
    Ok(Some(ChainEvent {
        constraint: i,
        kind: EventKind::Dim,
        before,
        after,
    }))
}

fn explicit_step(
    engine: &mut ExplicitEngine,
    i: usize,
    rel: &LangRelation,
    scope: &[usize],
) -> Result<Option<ChainEvent>, KernelError> {
    if engine.entails(rel, scope)? {
        return Ok(None);
    }
    let before = engine.measure();
    engine.advance(rel, scope)?;
    let after = engine.measure();
    let empty = engine.is_empty();
    let (kind, b, a) = if after.sig < before.sig || after.proj == before.proj {
        (EventKind::Sig, before.sig, after.sig)
    } else {
        (EventKind::Proj, before.proj, after.proj)
    };
    Ok(Some(ChainEvent {
        constraint: i,
        kind,
        before: b as i64,
        after: if empty { -1 } else { a as i64 },
    }))
}

/// Maltsev-embedding kernelization. Constraints are taken in order; one is
/// dropped iff the constraints kept so far already entail its image. The
/// kernel lists the kept constraints over the original relations.
pub fn kernelize(
    instance: &Instance,
    embedding: &Embedding,
    config: &EngineConfig,
) -> Result<(Instance, KernelReport), KernelError> {
    let limits = &config.limits;
    ensure_valid(instance, embedding, limits)?;
    let n = instance.num_vars();
    let engine = config.engine;
    match engine {
        EngineChoice::Affine => {
            let p = affine_modulus(&embedding.op).ok_or_else(|| KernelError::Unsupported {
                engine: "affine",
                reason: "the operation is not x − y + z mod p".into(),
            })?;
            let mut images = std::collections::BTreeMap::new();
            for name in embedding.base.names() {
                images.insert(name.to_string(), as_affine(embedding.image(name)?, p)?);
            }
            let mut state = AffineState::init(n, p)?;
            drive(instance, engine.name(), n, p, n as u64 + 1, |i, c| {
                affine_step(&mut state, i, &images[&c.relation], &c.scope)
            })
        }
        EngineChoice::Generic | EngineChoice::Coset => {
            let op = match &embedding.op {
                OpSpec::Edge { .. } | OpSpec::Symbolic { .. } => {
                    return Err(KernelError::Unsupported {
                        engine: engine.name(),
                        reason: "needs a Maltsev operation table".into(),
                    })
                }
                OpSpec::Table(_) if engine == EngineChoice::Coset => {
                    return Err(KernelError::Unsupported {
                        engine: "coset",
                        reason: "needs a group (coset or affine) operation".into(),
                    })
                }
                spec => spec.operation().expect("concrete operation"),
            };
            let d = op.domain().size();
            let bound = chain_bound(engine, n, d).expect("explicit bound");
            let mut state = ExplicitEngine::new(n, EngineKind::Maltsev(op), config.audit, *limits)?;
            drive(instance, engine.name(), n, d, bound, |i, c| {
                explicit_step(&mut state, i, embedding.image(&c.relation)?, &c.scope)
            })
        }
        EngineChoice::Kedge => kernelize_kedge(instance, embedding, config),
    }
}

/// The k-edge variant: the explicit engine measured by `sig_e` and `Proj`,
/// bound `1 + |sig_e(D^n)| + |Proj(D^n)|`. Maltsev operations are run as
/// 2-edge operations.
pub fn kernelize_kedge(
    instance: &Instance,
    embedding: &Embedding,
    config: &EngineConfig,
) -> Result<(Instance, KernelReport), KernelError> {
    let limits = &config.limits;
    ensure_valid(instance, embedding, limits)?;
    let (edge, terms) = match &embedding.op {
        OpSpec::Edge { k, op } => {
            let edge = EdgeOperation::new(*k, op.clone())?;
            let terms = crate::maltsev::search_edge_terms(&edge, config.edge_search_depth, limits)?;
            (edge, terms)
        }
        OpSpec::Symbolic { .. } => {
            return Err(KernelError::Unsupported {
                engine: "kedge",
                reason: "symbolic operations have no table".into(),
            })
        }
        spec => {
            let m = spec.operation().expect("concrete operation");
            (EdgeOperation::from_maltsev(&m)?, EdgeTerms::for_maltsev(&m))
        }
    };
    let n = instance.num_vars();
    let d = edge.op().domain().size();
    let mut state =
        ExplicitEngine::new(n, EngineKind::Edge { edge, terms }, config.audit, *limits)?;
    let full = state.measure();
    let bound = 1 + full.sig as u64 + full.proj as u64;
    drive(instance, "kedge", n, d, bound, |i, c| {
        explicit_step(&mut state, i, embedding.image(&c.relation)?, &c.scope)
    })
}

/// Kernelization through a degree-`c` extension: each constraint is lifted
/// to the monomial variables, its lifted relation is replaced by the affine
/// hull over `Z_p` (checked to meet the consistent extensions exactly) and
/// the affine engine runs on `|V^(c)|` variables. The kernel is expressed
/// over the original instance.
pub fn kernelize_degree(
    instance: &Instance,
    language: &Language,
    c: usize,
    p: u32,
    options: &ExtendOptions,
    config: &EngineConfig,
) -> Result<(Instance, KernelReport), KernelError> {
    let limits = &config.limits;
    if !modp::is_prime(p) {
        return Err(MaltsevError::NotPrime(p).into());
    }
    instance.validate(language)?;
    let ext = build_extension(instance, language, c, options, limits)?;
    let mut images = std::collections::BTreeMap::new();
    for (name, form) in &ext.forms {
        if !hull_is_extension_exact(&form.collapsed, form.m, &form.local, p, limits)? {
            return Err(KernelError::NoExtensionEmbedding(name.clone()));
        }
        images.insert(
            name.clone(),
            affine_hull(name, form.local.len(), p, &form.extended)?,
        );
    }
    let n = ext.map.len();
    let mut state = AffineState::init(n, p)?;
    let engine = format!("affine-degree-{c}");
    drive(instance, &engine, n, p, n as u64 + 1, |i, _| {
        let lifted = &ext.constraints[i];
        affine_step(&mut state, i, &images[&lifted.relation], &lifted.scope)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::one_in_k_embedding;
    use crate::model::{Constraint, DomainSpec, Relation};

    fn r13_instance(n: usize, scopes: &[[usize; 3]]) -> Instance {
        let emb = one_in_k_embedding(3, 3).unwrap();
        Instance::new(
            n,
            scopes
                .iter()
                .map(|s| Constraint::new("R1in3", s.to_vec()))
                .collect(),
            &emb.base,
        )
        .unwrap()
    }

    #[test]
    fn bounds() {
        assert_eq!(chain_bound(EngineChoice::Affine, 30, 3), Some(31));
        assert_eq!(chain_bound(EngineChoice::Generic, 10, 3), Some(60));
        assert_eq!(chain_bound(EngineChoice::Coset, 10, 4), Some(21));
        assert_eq!(chain_bound(EngineChoice::Coset, 10, 3), Some(16));
        assert_eq!(chain_bound(EngineChoice::Coset, 1, 2), Some(2));
        assert_eq!(chain_bound(EngineChoice::Coset, 40, 3), Some(64));
    }

    fn report_with(kept: usize) -> KernelReport {
        KernelReport {
            engine: "x".into(),
            n: 0,
            domain: 0,
            kept: (0..kept).collect(),
            dropped: vec![],
            unsat: false,
            bound: 0,
            chain_events: vec![],
            wall_ms: 0,
        }
    }

    #[test]
    fn audit_examples() {
        assert!(chain_audit(&report_with(30), 3, 30, EngineChoice::Affine).pass);
        let a = chain_audit(&report_with(61), 3, 10, EngineChoice::Generic);
        assert!(!a.pass);
        assert_eq!(a.bound, 60);
        assert!(chain_audit(&report_with(21), 4, 10, EngineChoice::Coset).pass);
        assert!(!chain_audit(&report_with(22), 4, 10, EngineChoice::Coset).pass);
    }

    #[test]
    fn duplicates_collapse_to_one() {
        let inst = r13_instance(4, &[[0, 1, 2]; 5]);
        let emb = one_in_k_embedding(3, 3).unwrap();
        for engine in [
            EngineChoice::Affine,
            EngineChoice::Generic,
            EngineChoice::Coset,
            EngineChoice::Kedge,
        ] {
            let (k, rep) = kernelize(&inst, &emb, &EngineConfig::new(engine)).unwrap();
            assert_eq!(k.len(), 1, "{engine:?}");
            assert_eq!(rep.kept, vec![0]);
            assert_eq!(rep.dropped, vec![1, 2, 3, 4]);
        }
    }

    #[test]
    fn contradiction_sets_unsat() {
        // the first two force x2 = x3, and then x2 + 2·x3 ≡ 1 has no solution
        let inst = r13_instance(4, &[[0, 1, 2], [0, 1, 3], [2, 3, 3], [0, 1, 2], [1, 2, 3]]);
        let emb = one_in_k_embedding(3, 3).unwrap();
        let (k, rep) = kernelize(&inst, &emb, &EngineConfig::new(EngineChoice::Affine)).unwrap();
        assert!(rep.unsat);
        assert_eq!(rep.kept.len(), k.len());
        assert_eq!(rep.chain_events.last().unwrap().after, -1);
        assert_eq!(rep.kept.len() + rep.dropped.len(), 5);
    }

    #[test]
    fn affine_engine_rejects_non_affine_ops() {
        let d3 = DomainSpec::new(3).unwrap();
        let eq = Relation::from_predicate("EQ", d3, 2, |t| t[0] == t[1]).unwrap();
        let lang = Language::with_relations(d3, [eq.into()]).unwrap();
        let m = TotalOperation::from_fn(3, d3, |a| {
            if a[0] == a[1] {
                a[2]
            } else if a[1] == a[2] {
                a[0]
            } else {
                a[1]
            }
        });
        assert!(m.is_maltsev());
        let emb = Embedding::identity(lang.clone(), OpSpec::Table(m));
        let inst = Instance::new(2, vec![Constraint::new("EQ", vec![0, 1])], &lang).unwrap();
        let err = kernelize(&inst, &emb, &EngineConfig::new(EngineChoice::Affine)).unwrap_err();
        assert!(matches!(
            err,
            KernelError::Unsupported {
                engine: "affine",
                ..
            }
        ));
        let (_, rep) = kernelize(&inst, &emb, &EngineConfig::new(EngineChoice::Generic)).unwrap();
        assert_eq!(rep.kept, vec![0]);
    }

    #[test]
    fn unvalidated_embedding_is_refused() {
        let mut emb = one_in_k_embedding(3, 3).unwrap();
        emb.map.clear();
        let inst = r13_instance(3, &[[0, 1, 2]]);
        assert!(matches!(
            kernelize(&inst, &emb, &EngineConfig::new(EngineChoice::Affine)),
            Err(KernelError::Unvalidated(_))
        ));
    }

    #[test]
    fn report_json_schema() {
        let inst = r13_instance(3, &[[0, 1, 2]]);
        let emb = one_in_k_embedding(3, 3).unwrap();
        let (_, rep) = kernelize(&inst, &emb, &EngineConfig::new(EngineChoice::Affine)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&rep.to_json()).unwrap();
        for key in [
            "engine",
            "n",
            "domain",
            "kept",
            "dropped",
            "unsat",
            "bound",
            "chain_events",
            "wall_ms",
        ] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["chain_events"][0]["kind"], "dim");
        assert_eq!(v["bound"], 4);
    }

    #[test]
    fn degree_two_polynomial() {
        // x1·x2 + x3 ≡ 1 (mod 2)
        let r = Relation::from_predicate("P", DomainSpec::BOOLEAN, 3, |t| {
            (t[0] * t[1] + t[2]) % 2 == 1
        })
        .unwrap();
        let lang = Language::with_relations(DomainSpec::BOOLEAN, [r.into()]).unwrap();
        let scopes = [[0, 1, 2], [1, 2, 3], [0, 1, 2], [2, 3, 0], [3, 1, 0]];
        let inst = Instance::new(
            4,
            scopes
                .iter()
                .map(|s| Constraint::new("P", s.to_vec()))
                .collect(),
            &lang,
        )
        .unwrap();
        let (k, rep) = kernelize_degree(
            &inst,
            &lang,
            2,
            2,
            &ExtendOptions::default(),
            &EngineConfig::new(EngineChoice::Affine),
        )
        .unwrap();
        assert_eq!(rep.bound, 1 + 4 + 6 + 1);
        assert!(rep.dropped.contains(&2));
        assert!(k.len() <= 4);
        // degree 1 over Z_2 is not exact for this relation
        assert!(matches!(
            kernelize_degree(
                &inst,
                &lang,
                1,
                2,
                &ExtendOptions::default(),
                &EngineConfig::new(EngineChoice::Affine)
            ),
            Err(KernelError::NoExtensionEmbedding(_))
        ));
    }
}
