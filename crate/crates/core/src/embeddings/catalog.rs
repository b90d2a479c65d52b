//! A fixed set of validated embeddings covering every operation family:
//! affine over several primes, abelian and non-abelian cosets, and the
//! degree-2 polynomial lift.

use std::collections::BTreeMap;

use super::classify::affine_embedding_search;
use super::embedding::{coset_embedding, one_in_k_embedding};
use super::group::Group;
use super::polynomial::{polynomial_embedding, Monomial, PolyRelation};
use super::{validate_embedding, Embedding, EmbeddingError};
use crate::limits::Limits;
use crate::model::{DomainSpec, Language, Relation};

/// `{(a, b) : a⁻¹·b ∈ {e, h}}` over the group's domain.
fn coset_pair(group: &Group, name: &str, h: u32) -> Relation {
    let d = DomainSpec::new(group.order()).expect("order at least 2");
    Relation::from_predicate(name, d, 2, |t| {
        let q = group.mul(group.inverse(t[0]), t[1]);
        q == group.identity() || q == h
    })
    .expect("binary relation")
}

/// The subgroup generated by all squares; for `S_n` this is `A_n`.
fn square_closure(group: &Group) -> Vec<bool> {
    let mut inside = vec![false; group.order() as usize];
    inside[group.identity() as usize] = true;
    for g in 0..group.order() {
        inside[group.mul(g, g) as usize] = true;
    }
    loop {
        let members: Vec<u32> = (0..group.order()).filter(|&g| inside[g as usize]).collect();
        let mut grew = false;
        for &a in &members {
            for &b in &members {
                let c = group.mul(a, b) as usize;
                grew |= !inside[c];
                inside[c] = true;
            }
        }
        if !grew {
            return inside;
        }
    }
}

/// Embeds the Boolean restrictions of `targets`, which must be cosets of
/// subgroups of `G^r`; base names drop the `_hat` suffix.
fn group_entry(
    group: &Group,
    targets: Vec<Relation>,
) -> (Language, Language, BTreeMap<String, String>) {
    let d = DomainSpec::new(group.order()).expect("order at least 2");
    let mut base = Language::new(DomainSpec::BOOLEAN);
    let mut target = Language::new(d);
    let mut map = BTreeMap::new();
    for rel in targets {
        let name = rel.name().trim_end_matches("_hat").to_string();
        base.add(
            rel.restrict_domain(DomainSpec::BOOLEAN)
                .with_name(name.clone()),
        )
        .expect("distinct names");
        map.insert(name, rel.name().to_string());
        target.add(rel).expect("distinct names");
    }
    (base, target, map)
}

fn klein_entry() -> (Group, Vec<Relation>) {
    let k4 = Group::product(&Group::cyclic(2), &Group::cyclic(2));
    let d = DomainSpec::new(4).expect("four elements");
    let diag = Relation::from_predicate("EQ_hat", d, 2, |t| t[0] == t[1]).expect("binary relation");
    let rels = vec![coset_pair(&k4, "H_hat", 1), diag];
    (k4, rels)
}

/// `{(a, b, c) : sgn a · sgn b · sgn c = s}` for `s` even and odd; both are
/// cosets of the preimage of a subgroup under the sign homomorphism.
fn s3_entry() -> Result<(Group, Vec<Relation>), EmbeddingError> {
    let s3 = Group::symmetric(3)?;
    let even = square_closure(&s3);
    let odd = |v: u32| u32::from(!even[v as usize]);
    let d = DomainSpec::new(6)?;
    let rels = [("XOR0_hat", 0), ("XOR1_hat", 1)]
        .into_iter()
        .map(|(name, s)| {
            Relation::from_predicate(name, d, 3, |t| (odd(t[0]) + odd(t[1]) + odd(t[2])) % 2 == s)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((s3, rels))
}

/// The named catalog. Every member has passed [`validate_embedding`].
pub fn catalog(limits: &Limits) -> Result<Vec<(String, Embedding)>, EmbeddingError> {
    let mut out = Vec::new();
    for (k, p) in [(1, 2), (2, 2), (3, 3), (4, 5), (5, 5), (3, 7)] {
        out.push((format!("one-in-{k} mod {p}"), one_in_k_embedding(k, p)?));
    }

    let parity = Language::with_relations(
        DomainSpec::BOOLEAN,
        [
            Relation::from_predicate("EVEN3", DomainSpec::BOOLEAN, 3, |t| {
                t.iter().sum::<u32>() % 2 == 0
            })?
            .into(),
            Relation::from_predicate("NEQ", DomainSpec::BOOLEAN, 2, |t| t[0] != t[1])?.into(),
        ],
    )?;
    let parity = affine_embedding_search(&parity, 2, limits)?
        .ok_or_else(|| EmbeddingError::InvalidArgument("parity language has no Z_2 hull".into()))?;
    out.push(("parity mod 2".to_string(), parity));

    for (label, (group, targets)) in [
        ("Klein four-group cosets", klein_entry()),
        ("S3 sign cosets", s3_entry()?),
    ] {
        let (base, target, map) = group_entry(&group, targets);
        out.push((
            label.to_string(),
            coset_embedding(group, base, target, map, limits)?,
        ));
    }

    let poly = PolyRelation {
        name: "P".into(),
        arity: 3,
        terms: vec![Monomial::new(1, [0, 1]), Monomial::new(1, [2])],
        rhs: 1,
    };
    out.push((
        "x1x2 + x3 = 1 lifted to degree 2".to_string(),
        polynomial_embedding(&[poly], 2, 2, limits)?.1,
    ));

    for (label, emb) in &out {
        validate_embedding(emb, limits)?
            .into_result()
            .map_err(|e| EmbeddingError::Unvalidated(format!("{label}: {e}")))?;
    }
    Ok(out)
}
