//! The exact engine for relations over Z_p preserved by `x − y + z`: the
//! solution space is always a coset `c + W` of a subspace.

use serde::{Deserialize, Serialize};

use super::MaltsevError;
use crate::model::{for_each_tuple, AffineRelation, DomainSpec, RTuple, Value};
use crate::modp;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Coset {
    /// Canonical representative: zero at every pivot column of `basis`.
    point: Vec<u32>,
    /// Reduced row-echelon basis of `W`.
    basis: Vec<Vec<u32>>,
    pivots: Vec<usize>,
}

/// A coset of `Z_p^n`, or the empty set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineState {
    n: usize,
    p: u32,
    coset: Option<Coset>,
}

impl AffineState {
    /// All of `Z_p^n`.
    pub fn init(n: usize, p: u32) -> Result<Self, MaltsevError> {
        if !modp::is_prime(p) {
            return Err(MaltsevError::NotPrime(p));
        }
        let basis = (0..n)
            .map(|i| {
                let mut v = vec![0; n];
                v[i] = 1;
                v
            })
            .collect();
        Ok(AffineState {
            n,
            p,
            coset: Some(Coset {
                point: vec![0; n],
                basis,
                pivots: (0..n).collect(),
            }),
        })
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn modulus(&self) -> u32 {
        self.p
    }

    pub fn is_empty(&self) -> bool {
        self.coset.is_none()
    }

    /// `dim W`, or `None` for the empty state.
    pub fn dimension(&self) -> Option<usize> {
        self.coset.as_ref().map(|c| c.basis.len())
    }

    pub fn point(&self) -> Option<&[u32]> {
        self.coset.as_ref().map(|c| c.point.as_slice())
    }

    pub fn basis(&self) -> &[Vec<u32>] {
        self.coset.as_ref().map_or(&[], |c| c.basis.as_slice())
    }

    fn check(&self, rel: &AffineRelation, scope: &[usize]) -> Result<(), MaltsevError> {
        if rel.modulus() != self.p {
            return Err(MaltsevError::ModulusMismatch {
                expected: self.p,
                got: rel.modulus(),
            });
        }
        if scope.len() != rel.arity() {
            return Err(MaltsevError::ScopeArity {
                expected: rel.arity(),
                got: scope.len(),
            });
        }
        if let Some(&v) = scope.iter().find(|&&v| v >= self.n) {
            return Err(MaltsevError::VariableOutOfRange { var: v, n: self.n });
        }
        Ok(())
    }

    /// `Σ_s a_s · v[scope_s]`.
    fn scoped_dot(&self, coeffs: &[u32], v: &[u32], scope: &[usize]) -> u32 {
        coeffs.iter().zip(scope).fold(0, |acc, (&a, &s)| {
            modp::add(acc, modp::mul(a, v[s], self.p), self.p)
        })
    }

    /// Does every point of the coset satisfy `rel(scope)`?
    pub fn entails(&self, rel: &AffineRelation, scope: &[usize]) -> Result<bool, MaltsevError> {
        self.check(rel, scope)?;
        let Some(c) = &self.coset else {
            return Ok(true);
        };
        Ok(rel.rows().iter().all(|row| {
            self.scoped_dot(&row.coeffs, &c.point, scope) == row.rhs
                && c.basis
                    .iter()
                    .all(|w| self.scoped_dot(&row.coeffs, w, scope) == 0)
        }))
    }

    /// The points of the coset that also satisfy `rel(scope)`.
    pub fn intersect(
        &self,
        rel: &AffineRelation,
        scope: &[usize],
    ) -> Result<AffineState, MaltsevError> {
        self.check(rel, scope)?;
        let Some(c) = &self.coset else {
            return Ok(self.clone());
        };
        let p = self.p;
        let m = c.basis.len();
        // x = c + Σ λ_j w_j; each row becomes a linear equation in λ
        let aug: Vec<Vec<u32>> = rel
            .rows()
            .iter()
            .map(|row| {
                let mut eq: Vec<u32> = c
                    .basis
                    .iter()
                    .map(|w| self.scoped_dot(&row.coeffs, w, scope))
                    .collect();
                eq.push(modp::sub(
                    row.rhs,
                    self.scoped_dot(&row.coeffs, &c.point, scope),
                    p,
                ));
                eq
            })
            .collect();
        let Some((lambda, kernel)) = modp::solve(aug, m, p) else {
            return Ok(AffineState {
                n: self.n,
                p,
                coset: None,
            });
        };
        let combine = |coeffs: &[u32], start: Vec<u32>| {
            let mut v = start;
            for (&l, w) in coeffs.iter().zip(&c.basis) {
                if l != 0 {
                    for (x, &y) in v.iter_mut().zip(w) {
                        *x = modp::add(*x, modp::mul(l, y, p), p);
                    }
                }
            }
            v
        };
        let mut point = combine(&lambda, c.point.clone());
        let mut basis: Vec<Vec<u32>> = kernel.iter().map(|k| combine(k, vec![0; self.n])).collect();
        let pivots = modp::rref(&mut basis, self.n, p);
        modp::reduce_by_basis(&mut point, &basis, &pivots, p);
        Ok(AffineState {
            n: self.n,
            p,
            coset: Some(Coset {
                point,
                basis,
                pivots,
            }),
        })
    }

    pub fn contains(&self, x: &[Value]) -> bool {
        let Some(c) = &self.coset else { return false };
        if x.len() != self.n || x.iter().any(|&v| v >= self.p) {
            return false;
        }
        let mut diff: Vec<u32> = x
            .iter()
            .zip(&c.point)
            .map(|(&a, &b)| modp::sub(a, b, self.p))
            .collect();
        modp::reduce_by_basis(&mut diff, &c.basis, &c.pivots, self.p);
        diff.iter().all(|&v| v == 0)
    }

    /// Number of points, `p^dim` or 0.
    pub fn count(&self) -> u128 {
        self.dimension()
            .map_or(0, |d| (self.p as u128).saturating_pow(d as u32))
    }

    /// All points in lexicographic order.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<RTuple>, MaltsevError> {
        if self.count() > cap as u128 {
            return Err(MaltsevError::LimitExceeded {
                what: "enumerated points",
                cap,
            });
        }
        let Some(c) = &self.coset else {
            return Ok(Vec::new());
        };
        let mut out = Vec::with_capacity(self.count() as usize);
        let d = DomainSpec::new(self.p).expect("prime modulus");
        for_each_tuple(d, c.basis.len(), |lambda| {
            let mut v = c.point.clone();
            for (&l, w) in lambda.iter().zip(&c.basis) {
                for (x, &y) in v.iter_mut().zip(w) {
                    *x = modp::add(*x, modp::mul(l, y, self.p), self.p);
                }
            }
            out.push(RTuple(v));
        });
        out.sort();
        Ok(out)
    }
}

/// The smallest coset of `Z_p^r` containing `tuples` (the affine hull), as a
/// system in reduced row-echelon form. An empty input gives the inconsistent
/// system.
pub fn affine_hull(
    name: &str,
    arity: usize,
    p: u32,
    tuples: &[RTuple],
) -> Result<AffineRelation, MaltsevError> {
    if !modp::is_prime(p) {
        return Err(MaltsevError::NotPrime(p));
    }
    if let Some(t) = tuples.iter().find(|t| t.arity() != arity) {
        return Err(MaltsevError::TupleArity {
            expected: arity,
            got: t.arity(),
        });
    }
    if let Some(&v) = tuples.iter().flat_map(|t| t.iter()).find(|&&v| v >= p) {
        return Err(MaltsevError::ValueOutOfRange {
            value: v,
            domain: p,
        });
    }
    let Some(t0) = tuples.first() else {
        let mut row = vec![0; arity];
        row.push(1);
        return Ok(AffineRelation::from_matrix(
            name.to_string(),
            arity,
            p,
            vec![row],
        ));
    };
    let mut diffs: Vec<Vec<u32>> = tuples[1..]
        .iter()
        .map(|t| {
            t.iter()
                .zip(t0.iter())
                .map(|(&a, &b)| modp::sub(a, b, p))
                .collect()
        })
        .collect();
    let pivots = modp::rref(&mut diffs, arity, p);
    let normals = modp::nullspace_from_rref(&diffs, &pivots, arity, p);
    let rows = normals
        .into_iter()
        .map(|mut a| {
            let b = modp::dot(&a, t0, p);
            a.push(b);
            a
        })
        .collect();
    Ok(AffineRelation::from_matrix(
        name.to_string(),
        arity,
        p,
        rows,
    ))
}
