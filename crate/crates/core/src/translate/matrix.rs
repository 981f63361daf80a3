use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::circuit::{Bit, Circuit};
use crate::kernel::Tuple;

/// Sparse boolean matrix: absent cells are FALSE.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolMatrix {
    arity: usize,
    cells: BTreeMap<Tuple, Bit>,
}

impl BoolMatrix {
    pub fn empty(arity: usize) -> Self {
        BoolMatrix {
            arity,
            cells: BTreeMap::new(),
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn set(&mut self, tuple: Tuple, bit: Bit) {
        debug_assert_eq!(tuple.len(), self.arity);
        if bit == Bit::FALSE {
            self.cells.remove(&tuple);
        } else {
            self.cells.insert(tuple, bit);
        }
    }

    pub fn get(&self, tuple: &[usize]) -> Bit {
        self.cells.get(tuple).copied().unwrap_or(Bit::FALSE)
    }

    /// Cells that are not constant FALSE, in tuple order.
    pub fn cells(&self) -> impl Iterator<Item = (&Tuple, Bit)> + '_ {
        self.cells.iter().map(|(t, &b)| (t, b))
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    fn or_into(&mut self, c: &mut Circuit, tuple: Tuple, bit: Bit) {
        let prev = self.get(&tuple);
        let v = c.or(prev, bit);
        self.set(tuple, v);
    }

    pub fn union(&self, other: &BoolMatrix, c: &mut Circuit) -> BoolMatrix {
        let mut out = self.clone();
        for (t, b) in other.cells() {
            out.or_into(c, t.clone(), b);
        }
        out
    }

    pub fn intersection(&self, other: &BoolMatrix, c: &mut Circuit) -> BoolMatrix {
        let mut out = BoolMatrix::empty(self.arity);
        for (t, a) in self.cells() {
            let v = c.and(a, other.get(t));
            out.set(t.clone(), v);
        }
        out
    }

    pub fn difference(&self, other: &BoolMatrix, c: &mut Circuit) -> BoolMatrix {
        let mut out = BoolMatrix::empty(self.arity);
        for (t, a) in self.cells() {
            let v = c.and(a, !other.get(t));
            out.set(t.clone(), v);
        }
        out
    }

    pub fn join(&self, other: &BoolMatrix, c: &mut Circuit) -> BoolMatrix {
        let arity = self.arity + other.arity - 2;
        let mut by_first: HashMap<usize, Vec<(&Tuple, Bit)>> = HashMap::new();
        for (t, b) in other.cells() {
            by_first.entry(t[0]).or_default().push((t, b));
        }
        let mut terms: BTreeMap<Tuple, Vec<Bit>> = BTreeMap::new();
        for (s, a) in self.cells() {
            let Some(matches) = by_first.get(&s[s.len() - 1]) else {
                continue;
            };
            for &(t, b) in matches {
                let mut key = s[..s.len() - 1].to_vec();
                key.extend_from_slice(&t[1..]);
                let v = c.and(a, b);
                terms.entry(key).or_default().push(v);
            }
        }
        let mut out = BoolMatrix::empty(arity);
        for (t, bits) in terms {
            let v = c.or_all(bits);
            out.set(t, v);
        }
        out
    }

    pub fn product(&self, other: &BoolMatrix, c: &mut Circuit) -> BoolMatrix {
        let mut out = BoolMatrix::empty(self.arity + other.arity);
        for (s, a) in self.cells() {
            for (t, b) in other.cells() {
                let mut key = s.clone();
                key.extend_from_slice(t);
                let v = c.and(a, b);
                out.set(key, v);
            }
        }
        out
    }

    pub fn transpose(&self) -> BoolMatrix {
        let mut out = BoolMatrix::empty(2);
        for (t, b) in self.cells() {
            out.set(vec![t[1], t[0]], b);
        }
        out
    }

    /// Transitive closure by iterative squaring. Paths never need more hops
    /// than there are atoms in the support, so ceil(log2 n) rounds suffice.
    pub fn closure(&self, c: &mut Circuit) -> BoolMatrix {
        let atoms: BTreeSet<usize> = self.cells.keys().flat_map(|t| t.iter().copied()).collect();
        let mut rounds = 0;
        while (1usize << rounds) < atoms.len() {
            rounds += 1;
        }
        let mut r = self.clone();
        for _ in 0..rounds {
            let rr = r.join(&r, c);
            r = r.union(&rr, c);
        }
        r
    }

    pub fn ite(cond: Bit, then: &BoolMatrix, otherwise: &BoolMatrix, c: &mut Circuit) -> BoolMatrix {
        let keys: BTreeSet<&Tuple> = then.cells.keys().chain(otherwise.cells.keys()).collect();
        let mut out = BoolMatrix::empty(then.arity);
        for t in keys {
            let v = c.ite(cond, then.get(t), otherwise.get(t));
            out.set(t.clone(), v);
        }
        out
    }

    pub fn project(&self, columns: &[usize], c: &mut Circuit) -> BoolMatrix {
        let mut terms: BTreeMap<Tuple, Vec<Bit>> = BTreeMap::new();
        for (t, b) in self.cells() {
            terms
                .entry(columns.iter().map(|&k| t[k]).collect())
                .or_default()
                .push(b);
        }
        let mut out = BoolMatrix::empty(columns.len());
        for (t, bits) in terms {
            let v = c.or_all(bits);
            out.set(t, v);
        }
        out
    }

    pub fn subset(&self, other: &BoolMatrix, c: &mut Circuit) -> Bit {
        let bits: Vec<Bit> = self.cells().map(|(t, a)| c.implies(a, other.get(t))).collect();
        c.and_all(bits)
    }

    pub fn equals(&self, other: &BoolMatrix, c: &mut Circuit) -> Bit {
        let x = self.subset(other, c);
        let y = other.subset(self, c);
        c.and(x, y)
    }

    pub fn some(&self, c: &mut Circuit) -> Bit {
        c.or_all(self.cells.values().copied())
    }

    /// At most one cell true, using a sequential "seen" chain.
    pub fn lone(&self, c: &mut Circuit) -> Bit {
        let mut seen = Bit::FALSE;
        let mut bad = Bit::FALSE;
        for &x in self.cells.values() {
            let clash = c.and(seen, x);
            bad = c.or(bad, clash);
            seen = c.or(seen, x);
        }
        !bad
    }

    pub fn one(&self, c: &mut Circuit) -> Bit {
        let s = self.some(c);
        let l = self.lone(c);
        c.and(s, l)
    }
}
