use std::fmt;

use serde::{Deserialize, Serialize};

use super::inf::{u_apply, InfElement};
use super::operation::{PartialOperation, TotalOperation};
use crate::model::{for_each_tuple, DomainSpec, Value};

/// A term over one ternary symbol. Leaves are 0-based argument indices
/// (printed as `x1`, `x2`, …).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Term {
    Var(usize),
    App(Box<[Term; 3]>),
}

impl Term {
    pub fn app(a: Term, b: Term, c: Term) -> Term {
        Term::App(Box::new([a, b, c]))
    }

    /// One more than the largest variable index.
    pub fn arity(&self) -> usize {
        match self {
            Term::Var(i) => i + 1,
            Term::App(ch) => ch.iter().map(Term::arity).max().unwrap_or(0),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Term::Var(_) => 0,
            Term::App(ch) => 1 + ch.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(ch) => ch.iter().map(Term::leaf_count).sum(),
        }
    }

    /// Same shape with leaves renamed `x1, x2, …` from left to right.
    pub fn with_fresh_variables(&self) -> Term {
        fn go(t: &Term, next: &mut usize) -> Term {
            match t {
                Term::Var(_) => {
                    *next += 1;
                    Term::Var(*next - 1)
                }
                Term::App(ch) => {
                    let a = go(&ch[0], next);
                    let b = go(&ch[1], next);
                    let c = go(&ch[2], next);
                    Term::app(a, b, c)
                }
            }
        }
        go(self, &mut 0)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(i) => write!(f, "x{}", i + 1),
            Term::App(ch) => write!(f, "u({},{},{})", ch[0], ch[1], ch[2]),
        }
    }
}

impl fmt::Debug for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Bottom-up evaluation of `term` with the base symbol interpreted by `base`.
///
/// Panics if `args` is shorter than the term's arity.
pub fn eval_term<T: Clone>(term: &Term, base: &mut impl FnMut(&T, &T, &T) -> T, args: &[T]) -> T {
    match term {
        Term::Var(i) => args[*i].clone(),
        Term::App(ch) => {
            let a = eval_term(&ch[0], base, args);
            let b = eval_term(&ch[1], base, args);
            let c = eval_term(&ch[2], base, args);
            base(&a, &b, &c)
        }
    }
}

/// The Boolean restriction of the term operation over the symbolic domain:
/// defined exactly on the Boolean arguments whose symbolic value is 0 or 1.
pub fn restrict_term(term: &Term) -> PartialOperation {
    let n = term.arity();
    let mut defined = std::collections::BTreeMap::new();
    let mut args = Vec::with_capacity(n);
    for_each_tuple(DomainSpec::BOOLEAN, n, |b| {
        args.clear();
        args.extend(b.iter().map(|&v| InfElement::from_bool(v)));
        if let Some(v) = eval_term(term, &mut u_apply, &args).as_bool() {
            defined.insert(b.to_vec(), v);
        }
    });
    PartialOperation::new(n, DomainSpec::BOOLEAN, defined).expect("Boolean values only")
}

/// The term operation obtained by interpreting the symbol as `op`.
pub fn term_operation(term: &Term, op: &TotalOperation) -> TotalOperation {
    let n = term.arity();
    TotalOperation::from_fn(n, op.domain(), |a| {
        eval_term(
            term,
            &mut |x: &Value, y: &Value, z: &Value| op.get3(*x, *y, *z),
            a,
        )
    })
}
