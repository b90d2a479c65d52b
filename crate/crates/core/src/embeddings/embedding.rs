use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::group::{coset_identity_violation, Group};
use super::symbolic::{symbolic_maltsev_closure, SymbolicStatus};
use super::EmbeddingError;
use crate::algebra::{preserves, TotalOperation};
use crate::limits::Limits;
use crate::maltsev::EdgeOperation;
use crate::model::{
    for_each_tuple, AffineRelation, AffineRow, DomainSpec, LangRelation, Language, RTuple, Relation,
};
use crate::modp;

/// The operation certifying an embedding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum OpSpec {
    /// `x − y + z mod p`.
    Affine { modulus: u32 },
    /// An explicit Maltsev table.
    Table(TotalOperation),
    /// An explicit `(k+1)`-ary k-edge table.
    Edge { k: usize, op: TotalOperation },
    /// `x · y⁻¹ · z` of a finite group.
    Coset(Group),
    /// The free Maltsev operation on `D∞`, explored up to a term depth.
    Symbolic { depth: usize },
}

impl OpSpec {
    /// The concrete operation, when there is one.
    pub fn operation(&self) -> Option<TotalOperation> {
        match self {
            OpSpec::Affine { modulus } => Some(TotalOperation::affine_maltsev(*modulus)),
            OpSpec::Table(op) | OpSpec::Edge { op, .. } => Some(op.clone()),
            OpSpec::Coset(g) => Some(g.coset_operation()),
            OpSpec::Symbolic { .. } => None,
        }
    }

    pub fn domain_size(&self) -> Option<u32> {
        match self {
            OpSpec::Affine { modulus } => Some(*modulus),
            OpSpec::Table(op) | OpSpec::Edge { op, .. } => Some(op.domain().size()),
            OpSpec::Coset(g) => Some(g.order()),
            OpSpec::Symbolic { .. } => None,
        }
    }
}

/// A map `h` from the relations of `base` to relations of `target` over a
/// domain containing the base domain, with the operation preserving every
/// image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Embedding {
    pub base: Language,
    pub target: Language,
    pub map: BTreeMap<String, String>,
    pub op: OpSpec,
}

impl Embedding {
    /// `R ↦ R` for a language that is already invariant under `op`.
    pub fn identity(language: Language, op: OpSpec) -> Self {
        let map = language
            .names()
            .map(|n| (n.to_string(), n.to_string()))
            .collect();
        Embedding {
            base: language.clone(),
            target: language,
            map,
            op,
        }
    }

    /// The image `h(R)` of a base relation.
    pub fn image(&self, base_name: &str) -> Result<&LangRelation, EmbeddingError> {
        let target = self.map.get(base_name).ok_or_else(|| {
            EmbeddingError::Unvalidated(format!("relation {base_name} is not mapped"))
        })?;
        Ok(self.target.relation(target)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Clause {
    Names,
    Arity,
    Domain,
    Restriction,
    Identities,
    Preservation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub clause: Clause,
    pub relation: Option<String>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.relation {
            Some(r) => write!(f, "{:?} ({r}): {}", self.clause, self.message),
            None => write!(f, "{:?}: {}", self.clause, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    pub fn into_result(self) -> Result<(), EmbeddingError> {
        if self.valid {
            Ok(())
        } else {
            let text: Vec<String> = self.diagnostics.iter().map(|d| d.to_string()).collect();
            Err(EmbeddingError::Unvalidated(text.join("; ")))
        }
    }
}

struct Diagnostics(Vec<Diagnostic>);

impl Diagnostics {
    fn push(&mut self, clause: Clause, relation: Option<&str>, message: impl Into<String>) {
        self.0.push(Diagnostic {
            clause,
            relation: relation.map(str::to_string),
            message: message.into(),
        });
    }
}

/// Checks every clause of the embedding definition and reports each failure
/// with a witness. Only resource caps produce an `Err`.
pub fn validate_embedding(
    emb: &Embedding,
    limits: &Limits,
) -> Result<ValidationReport, EmbeddingError> {
    let mut diag = Diagnostics(Vec::new());
    if let OpSpec::Symbolic { depth } = emb.op {
        validate_symbolic(emb, depth, limits, &mut diag)?;
        return Ok(ValidationReport {
            valid: diag.0.is_empty(),
            diagnostics: diag.0,
        });
    }
    check_names(emb, &mut diag);
    let op = emb.op.operation().expect("concrete operation");
    check_identities(emb, &op, &mut diag);
    let base_dom = emb.base.domain();
    let target_dom = emb.target.domain();
    if base_dom.size() > target_dom.size() {
        diag.push(
            Clause::Domain,
            None,
            format!(
                "target domain {} does not contain base domain {}",
                target_dom.size(),
                base_dom.size()
            ),
        );
    }
    if op.domain() != target_dom {
        diag.push(
            Clause::Domain,
            None,
            format!(
                "operation acts on {} elements, target domain has {}",
                op.domain().size(),
                target_dom.size()
            ),
        );
    }
    if !diag.0.is_empty() {
        return Ok(ValidationReport {
            valid: false,
            diagnostics: diag.0,
        });
    }
    for (name, image_name) in &emb.map {
        let (Some(r), Some(image)) = (emb.base.get(name), emb.target.get(image_name)) else {
            continue;
        };
        if r.arity() != image.arity() {
            diag.push(
                Clause::Arity,
                Some(name),
                format!("arity {} maps to arity {}", r.arity(), image.arity()),
            );
            continue;
        }
        let r = r.materialize(limits.tuples)?;
        check_restriction(&r, image, base_dom, limits, &mut diag)?;
        check_preservation(&emb.op, &op, name, image, limits, &mut diag)?;
    }
    Ok(ValidationReport {
        valid: diag.0.is_empty(),
        diagnostics: diag.0,
    })
}

fn check_names(emb: &Embedding, diag: &mut Diagnostics) {
    for name in emb.base.names() {
        if !emb.map.contains_key(name) {
            diag.push(Clause::Names, Some(name), "base relation has no image");
        }
    }
    let mut images = BTreeSet::new();
    for (name, image) in &emb.map {
        if emb.base.get(name).is_none() {
            diag.push(
                Clause::Names,
                Some(name),
                "mapped name is not a base relation",
            );
        }
        if emb.target.get(image).is_none() {
            diag.push(
                Clause::Names,
                Some(name),
                format!("image {image} is not a target relation"),
            );
        }
        if !images.insert(image) {
            diag.push(
                Clause::Names,
                Some(name),
                format!("image {image} is shared by two relations"),
            );
        }
    }
}

fn check_identities(emb: &Embedding, op: &TotalOperation, diag: &mut Diagnostics) {
    match &emb.op {
        OpSpec::Affine { modulus } => {
            if !modp::is_prime(*modulus) {
                diag.push(
                    Clause::Identities,
                    None,
                    format!("modulus {modulus} is not prime"),
                );
            }
        }
        OpSpec::Table(m) => {
            if let Some((x, y)) = m.maltsev_violation() {
                diag.push(
                    Clause::Identities,
                    None,
                    format!("m(x,x,y)=y or m(x,y,y)=x fails at x={x}, y={y}"),
                );
            }
        }
        OpSpec::Edge { k, op } => {
            if let Err(e) = EdgeOperation::new(*k, op.clone()) {
                diag.push(Clause::Identities, None, e.to_string());
            }
        }
        OpSpec::Coset(_) => {
            if let Some((x, y)) = op.maltsev_violation() {
                diag.push(
                    Clause::Identities,
                    None,
                    format!("s(x,y,y)=x or s(x,x,y)=y fails at x={x}, y={y}"),
                );
            }
            if let Some([x, y, z, u]) = coset_identity_violation(op) {
                diag.push(
                    Clause::Identities,
                    None,
                    format!("m(m(x,y,z),z,u)=m(x,y,u) fails at ({x},{y},{z},{u})"),
                );
            }
        }
        OpSpec::Symbolic { .. } => {}
    }
}

/// `image ∩ D^r = r`, deciding by whichever of the two sides is smaller to
/// enumerate.
fn check_restriction(
    r: &Relation,
    image: &LangRelation,
    base_dom: DomainSpec,
    limits: &Limits,
    diag: &mut Diagnostics,
) -> Result<(), EmbeddingError> {
    let name = r.name();
    let cube = base_dom.power(r.arity());
    let image_size = match image {
        LangRelation::Explicit(e) => e.len() as u128,
        LangRelation::Affine(a) => a.solution_count(),
    };
    if cube <= limits.tuples as u128 && cube <= image_size.max(r.len() as u128) {
        let mut bad: Option<(Vec<u32>, bool)> = None;
        for_each_tuple(base_dom, r.arity(), |t| {
            if bad.is_none() && r.contains(t) != image.contains(t) {
                bad = Some((t.to_vec(), r.contains(t)));
            }
        });
        if let Some((t, in_r)) = bad {
            report_restriction(name, &t, in_r, diag);
        }
        return Ok(());
    }
    if image_size > limits.tuples as u128 {
        return Err(EmbeddingError::LimitExceeded {
            what: "Boolean restriction check",
            cap: limits.tuples,
        });
    }
    let inside = image.materialize(limits.tuples)?;
    let restricted: Vec<&RTuple> = inside
        .tuples()
        .iter()
        .filter(|t| t.iter().all(|&v| base_dom.contains(v)))
        .collect();
    if let Some(t) = restricted.iter().find(|t| !r.contains(t)) {
        report_restriction(name, t, false, diag);
    } else if let Some(t) = r.tuples().iter().find(|t| !inside.contains(t)) {
        report_restriction(name, t, true, diag);
    }
    Ok(())
}

fn report_restriction(name: &str, t: &[u32], in_r: bool, diag: &mut Diagnostics) {
    let t = RTuple(t.to_vec());
    let message = if in_r {
        format!("{t} is in the relation but not in its image")
    } else {
        format!("{t} is in the image but not in the relation")
    };
    diag.push(Clause::Restriction, Some(name), message);
}

fn check_preservation(
    spec: &OpSpec,
    op: &TotalOperation,
    name: &str,
    image: &LangRelation,
    limits: &Limits,
    diag: &mut Diagnostics,
) -> Result<(), EmbeddingError> {
    if let (OpSpec::Affine { modulus }, LangRelation::Affine(a)) = (spec, image) {
        // every coset of Z_p^r is closed under x − y + z
        if a.modulus() == *modulus {
            return Ok(());
        }
    }
    let rel = image.materialize(limits.tuples)?;
    let verdict = preserves(op, &rel, limits)?;
    if let Some(w) = verdict.witness {
        let args: Vec<String> = w.tuples.iter().map(|t| t.to_string()).collect();
        diag.push(
            Clause::Preservation,
            Some(name),
            format!(
                "{} maps to {} outside {}",
                args.join(", "),
                w.output,
                image.name()
            ),
        );
    }
    Ok(())
}

fn validate_symbolic(
    emb: &Embedding,
    depth: usize,
    limits: &Limits,
    diag: &mut Diagnostics,
) -> Result<(), EmbeddingError> {
    if !emb.base.domain().is_boolean() {
        diag.push(
            Clause::Domain,
            None,
            "symbolic embeddings need a Boolean base language",
        );
        return Ok(());
    }
    for r in emb.base.relations() {
        let r = r.materialize(limits.tuples)?;
        let report = symbolic_maltsev_closure(&r, depth, limits)?;
        if let (SymbolicStatus::Violation, Some(v)) = (report.status, report.violation) {
            diag.push(
                Clause::Preservation,
                Some(r.name()),
                format!("{} yields {} at depth {}", v.term, v.output, v.depth),
            );
        }
    }
    Ok(())
}

/// The 1-in-k relation `{t ∈ {0,1}^k : exactly one t[i] = 1}`.
pub fn one_in_k_relation(k: usize) -> Relation {
    Relation::from_predicate(format!("R1in{k}"), DomainSpec::BOOLEAN, k, |t| {
        t.iter().sum::<u32>() == 1
    })
    .expect("k at least 1")
}

/// `R1ink ↦ {x ∈ Z_p^k : x_1 + … + x_k ≡ 1}` with `x − y + z mod p`.
pub fn one_in_k_embedding(k: usize, p: u32) -> Result<Embedding, EmbeddingError> {
    if k == 0 {
        return Err(EmbeddingError::InvalidArgument(
            "k must be at least 1".into(),
        ));
    }
    if !modp::is_prime(p) {
        return Err(EmbeddingError::NotPrime(p));
    }
    if (p as usize) < k {
        return Err(EmbeddingError::InvalidArgument(format!(
            "modulus {p} is smaller than k = {k}"
        )));
    }
    let base_rel = one_in_k_relation(k);
    let image_name = format!("{}_hat", base_rel.name());
    let image = AffineRelation::new(
        image_name.clone(),
        k,
        p,
        vec![AffineRow {
            coeffs: vec![1; k],
            rhs: 1,
        }],
    )?;
    let map = BTreeMap::from([(base_rel.name().to_string(), image_name)]);
    Ok(Embedding {
        base: Language::with_relations(DomainSpec::BOOLEAN, [base_rel.into()])?,
        target: Language::with_relations(image.domain(), [image.into()])?,
        map,
        op: OpSpec::Affine { modulus: p },
    })
}

/// An embedding whose operation is the coset generating operation of
/// `group`; the group axioms and every preservation clause are checked.
pub fn coset_embedding(
    group: Group,
    base: Language,
    target: Language,
    map: BTreeMap<String, String>,
    limits: &Limits,
) -> Result<Embedding, EmbeddingError> {
    let emb = Embedding {
        base,
        target,
        map,
        op: OpSpec::Coset(group),
    };
    validate_embedding(&emb, limits)?.into_result()?;
    Ok(emb)
}
