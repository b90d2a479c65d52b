use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Embedding, EmbeddingError, OpSpec};
use crate::kernelize::monomial_subsets;
use crate::limits::Limits;
use crate::model::{
    for_each_tuple, AffineRelation, AffineRow, DomainSpec, Language, RTuple, Relation, Value,
};
use crate::modp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monomial {
    pub coeff: u32,
    /// 0-based positions; an empty list is the constant term.
    pub vars: Vec<usize>,
}

impl Monomial {
    pub fn new(coeff: u32, vars: impl Into<Vec<usize>>) -> Self {
        Monomial {
            coeff,
            vars: vars.into(),
        }
    }
}

/// `{t ∈ {0,1}^arity : Σ coeff·∏ t[v] ≡ rhs (mod q)}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyRelation {
    pub name: String,
    pub arity: usize,
    pub terms: Vec<Monomial>,
    pub rhs: u32,
}

impl PolyRelation {
    /// Size of the largest monomial after collapsing repeated positions.
    pub fn degree(&self) -> usize {
        self.terms
            .iter()
            .map(|m| support(&m.vars).len())
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, t: &[Value], q: u32) -> u32 {
        self.terms.iter().fold(0, |acc, m| {
            let prod: u32 = m.vars.iter().map(|&v| t[v]).product();
            modp::add(acc, modp::mul(m.coeff % q, prod, q), q)
        })
    }

    /// The Boolean solutions.
    pub fn relation(&self, q: u32) -> Result<Relation, EmbeddingError> {
        self.check(q)?;
        Ok(Relation::from_predicate(
            self.name.clone(),
            DomainSpec::BOOLEAN,
            self.arity,
            |t| self.evaluate(t, q) == self.rhs % q,
        )?)
    }

    fn check(&self, q: u32) -> Result<(), EmbeddingError> {
        if !modp::is_prime(q) {
            return Err(EmbeddingError::NotPrime(q));
        }
        if let Some(v) = self
            .terms
            .iter()
            .flat_map(|m| &m.vars)
            .find(|&&v| v >= self.arity)
        {
            return Err(EmbeddingError::InvalidArgument(format!(
                "{}: position {v} beyond arity {}",
                self.name, self.arity
            )));
        }
        Ok(())
    }
}

fn support(vars: &[usize]) -> Vec<usize> {
    let mut s = vars.to_vec();
    s.sort_unstable();
    s.dedup();
    s
}

/// Lifts each polynomial relation to its degree-`d` monomial coordinates
/// (the constant monomial included) where it becomes one linear equation
/// over `Z_q`, together with `X_∅ ≡ 1`. The base relation `Ř` of the result
/// is the Boolean part of that system; it is named `R^d`, the name used by
/// `degree_extend` for scopes without repeated variables.
pub fn polynomial_embedding(
    polys: &[PolyRelation],
    q: u32,
    d: usize,
    limits: &Limits,
) -> Result<(usize, Embedding), EmbeddingError> {
    if !modp::is_prime(q) {
        return Err(EmbeddingError::NotPrime(q));
    }
    if d == 0 {
        return Err(EmbeddingError::InvalidArgument(
            "degree must be at least 1".into(),
        ));
    }
    let mut base = Language::new(DomainSpec::BOOLEAN);
    let mut target = Language::new(DomainSpec::new(q)?);
    let mut map = BTreeMap::new();
    for poly in polys {
        poly.check(q)?;
        if poly.degree() > d {
            return Err(EmbeddingError::InvalidArgument(format!(
                "{} has degree {} above {d}",
                poly.name,
                poly.degree()
            )));
        }
        let local = monomial_subsets(poly.arity, d, true);
        let mut coeffs = vec![0u32; local.len()];
        for m in &poly.terms {
            let col = local
                .iter()
                .position(|s| *s == support(&m.vars))
                .expect("degree checked");
            coeffs[col] = modp::add(coeffs[col], m.coeff % q, q);
        }
        let mut constant = vec![0u32; local.len()];
        constant[0] = 1;
        let name = format!("{}^{d}", poly.name);
        let image_name = format!("{name}_hat");
        let image = AffineRelation::new(
            image_name.clone(),
            local.len(),
            q,
            vec![
                AffineRow {
                    coeffs,
                    rhs: poly.rhs % q,
                },
                AffineRow {
                    coeffs: constant,
                    rhs: 1,
                },
            ],
        )?;
        base.add(boolean_part(&image, &name, limits)?)?;
        target.add(image)?;
        map.insert(name, image_name);
    }
    Ok((
        d,
        Embedding {
            base,
            target,
            map,
            op: OpSpec::Affine { modulus: q },
        },
    ))
}

/// `image ∩ {0,1}^l`, enumerating whichever side is smaller.
fn boolean_part(
    image: &AffineRelation,
    name: &str,
    limits: &Limits,
) -> Result<Relation, EmbeddingError> {
    let l = image.arity();
    let cube = DomainSpec::BOOLEAN.power(l);
    if image.solution_count() <= cube {
        let all = image.enumerate(limits.tuples)?;
        let tuples = all
            .tuples()
            .iter()
            .filter(|t| t.iter().all(|&v| v < 2))
            .cloned();
        return Ok(Relation::new(name, DomainSpec::BOOLEAN, l, tuples)?);
    }
    if cube > limits.tuples as u128 {
        return Err(EmbeddingError::LimitExceeded {
            what: "Boolean part of an extended relation",
            cap: limits.tuples,
        });
    }
    let mut tuples = Vec::new();
    for_each_tuple(DomainSpec::BOOLEAN, l, |t| {
        if image.contains(t) {
            tuples.push(RTuple(t.to_vec()));
        }
    });
    Ok(Relation::new(name, DomainSpec::BOOLEAN, l, tuples)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embeddings::{one_in_k_embedding, validate_embedding};
    use crate::kernelize::extend_tuple;

    fn xy_plus_z() -> PolyRelation {
        PolyRelation {
            name: "P".into(),
            arity: 3,
            terms: vec![Monomial::new(1, [0, 1]), Monomial::new(1, [2])],
            rhs: 1,
        }
    }

    #[test]
    fn product_plus_variable() {
        let (c, emb) = polynomial_embedding(&[xy_plus_z()], 2, 2, &Limits::default()).unwrap();
        assert_eq!(c, 2);
        let image = match emb.target.relation("P^2_hat").unwrap() {
            crate::model::LangRelation::Affine(a) => a.clone(),
            _ => unreachable!(),
        };
        // subsets ∅,{1},{2},{3},{1,2},{1,3},{2,3}: the row touches {3} and {1,2}
        let expect = AffineRelation::new(
            "P^2_hat",
            7,
            2,
            vec![
                AffineRow {
                    coeffs: vec![0, 0, 0, 1, 1, 0, 0],
                    rhs: 1,
                },
                AffineRow {
                    coeffs: vec![1, 0, 0, 0, 0, 0, 0],
                    rhs: 1,
                },
            ],
        )
        .unwrap();
        assert_eq!(image.rows(), expect.rows());
        assert!(validate_embedding(&emb, &Limits::default()).unwrap().valid);
        // t ∈ R ⇔ ť ∈ Ř on every Boolean t
        let r = xy_plus_z().relation(2).unwrap();
        let base = emb.base.relation("P^2").unwrap();
        let local = monomial_subsets(3, 2, true);
        for_each_tuple(DomainSpec::BOOLEAN, 3, |t| {
            assert_eq!(r.contains(t), base.contains(&extend_tuple(t, &local)));
        });
    }

    #[test]
    fn linear_sum_matches_one_in_k() {
        let k = 3;
        let poly = PolyRelation {
            name: "S".into(),
            arity: k,
            terms: (0..k).map(|i| Monomial::new(1, [i])).collect(),
            rhs: 1,
        };
        let (_, emb) = polynomial_embedding(&[poly], 3, 1, &Limits::default()).unwrap();
        assert!(validate_embedding(&emb, &Limits::default()).unwrap().valid);
        let lifted = emb
            .target
            .relation("S^1_hat")
            .unwrap()
            .materialize(1000)
            .unwrap();
        let dropped: Vec<RTuple> = lifted
            .tuples()
            .iter()
            .map(|t| RTuple(t[1..].to_vec()))
            .collect();
        let reference = one_in_k_embedding(3, 3).unwrap();
        let r_hat = reference
            .target
            .relation("R1in3_hat")
            .unwrap()
            .materialize(1000)
            .unwrap();
        assert_eq!(dropped, r_hat.tuples());
        assert!(lifted.tuples().iter().all(|t| t[0] == 1));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            polynomial_embedding(&[xy_plus_z()], 4, 2, &Limits::default()),
            Err(EmbeddingError::NotPrime(4))
        ));
        assert!(matches!(
            polynomial_embedding(&[xy_plus_z()], 2, 1, &Limits::default()),
            Err(EmbeddingError::InvalidArgument(_))
        ));
    }
}
