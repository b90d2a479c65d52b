//! The free symbolic Maltsev algebra on `{0, 1}`.
//!
//! Elements are `0`, `1`, or formal triples of elements. The operation `u`
//! obeys the Maltsev identities and otherwise just builds the triple.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum InfElement {
    Zero,
    One,
    Triple(Arc<[InfElement; 3]>),
}

impl InfElement {
    pub fn from_bool(b: u32) -> Self {
        if b == 0 {
            InfElement::Zero
        } else {
            InfElement::One
        }
    }

    pub fn triple(x: InfElement, y: InfElement, z: InfElement) -> Self {
        InfElement::Triple(Arc::new([x, y, z]))
    }

    /// `Some(0|1)` for atoms.
    pub fn as_bool(&self) -> Option<u32> {
        match self {
            InfElement::Zero => Some(0),
            InfElement::One => Some(1),
            InfElement::Triple(_) => None,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            InfElement::Zero | InfElement::One => 0,
            InfElement::Triple(t) => 1 + t.iter().map(InfElement::depth).max().unwrap_or(0),
        }
    }
}

impl fmt::Debug for InfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfElement::Zero => write!(f, "0"),
            InfElement::One => write!(f, "1"),
            InfElement::Triple(t) => write!(f, "({:?},{:?},{:?})", t[0], t[1], t[2]),
        }
    }
}

impl fmt::Display for InfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// `u(x,x,y) = y`, `u(x,y,y) = x`, otherwise the triple `(x,y,z)`.
pub fn u_apply(x: &InfElement, y: &InfElement, z: &InfElement) -> InfElement {
    if x == y {
        z.clone()
    } else if y == z {
        x.clone()
    } else {
        InfElement::triple(x.clone(), y.clone(), z.clone())
    }
}

/// Hash-consed elements: structurally equal elements share one id, so
/// equality is id equality. Ids 0 and 1 are the atoms.
#[derive(Debug, Clone)]
pub struct InfArena {
    nodes: Vec<[u32; 3]>,
    index: HashMap<[u32; 3], u32>,
}

impl Default for InfArena {
    fn default() -> Self {
        Self::new()
    }
}

impl InfArena {
    pub const ZERO: u32 = 0;
    pub const ONE: u32 = 1;

    pub fn new() -> Self {
        // the two atom slots are never looked up as triples
        InfArena {
            nodes: vec![[u32::MAX; 3], [u32::MAX; 3]],
            index: HashMap::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_atom(id: u32) -> bool {
        id < 2
    }

    pub fn u(&mut self, x: u32, y: u32, z: u32) -> u32 {
        if x == y {
            return z;
        }
        if y == z {
            return x;
        }
        let key = [x, y, z];
        if let Some(&id) = self.index.get(&key) {
            return id;
        }
        let id = self.nodes.len() as u32;
        self.nodes.push(key);
        self.index.insert(key, id);
        id
    }

    pub fn element(&self, id: u32) -> InfElement {
        match id {
            0 => InfElement::Zero,
            1 => InfElement::One,
            _ => {
                let [a, b, c] = self.nodes[id as usize];
                InfElement::triple(self.element(a), self.element(b), self.element(c))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_element() -> impl Strategy<Value = InfElement> {
        let leaf = prop_oneof![Just(InfElement::Zero), Just(InfElement::One)];
        leaf.prop_recursive(4, 64, 3, |inner| {
            (inner.clone(), inner.clone(), inner).prop_map(|(a, b, c)| InfElement::triple(a, b, c))
        })
    }

    #[test]
    fn atoms_and_triples() {
        use InfElement::*;
        assert_eq!(u_apply(&Zero, &Zero, &One), One);
        assert_eq!(u_apply(&One, &One, &Zero), Zero);
        assert_eq!(u_apply(&Zero, &One, &One), Zero);
        let t = u_apply(&Zero, &One, &Zero);
        assert_eq!(t, InfElement::triple(Zero, One, Zero));
        assert_eq!(t.depth(), 1);
        assert_eq!(t.as_bool(), None);
    }

    #[test]
    fn arena_matches_tree() {
        let mut arena = InfArena::new();
        let a = arena.u(0, 1, 0);
        let b = arena.u(0, 1, 0);
        assert_eq!(a, b);
        let c = arena.u(a, 1, 1);
        assert_eq!(c, a);
        let d = arena.u(a, 0, 1);
        assert_eq!(
            arena.element(d),
            u_apply(&arena.element(a), &InfElement::Zero, &InfElement::One)
        );
    }

    proptest! {
        #[test]
        fn maltsev_identities(x in arb_element(), y in arb_element()) {
            prop_assert_eq!(u_apply(&x, &x, &y), y.clone());
            prop_assert_eq!(u_apply(&x, &y, &y), x);
        }

        #[test]
        fn non_identity_case_builds_triple(x in arb_element(), y in arb_element(), z in arb_element()) {
            prop_assume!(x != y && y != z);
            let t = u_apply(&x, &y, &z);
            prop_assert_eq!(t.depth(), 1 + x.depth().max(y.depth()).max(z.depth()));
        }
    }
}
