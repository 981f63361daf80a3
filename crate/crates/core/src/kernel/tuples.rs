use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{KernelError, Universe};

/// A tuple of atom ordinals.
pub type Tuple = Vec<usize>;

/// A set of equal-length tuples over one universe.
#[derive(Clone, PartialEq, Eq)]
pub struct TupleSet {
    universe: Universe,
    arity: usize,
    tuples: BTreeSet<Tuple>,
}

impl TupleSet {
    pub fn empty(universe: &Universe, arity: usize) -> Self {
        assert!(arity >= 1, "tuple sets have positive arity");
        TupleSet {
            universe: universe.clone(),
            arity,
            tuples: BTreeSet::new(),
        }
    }

    /// Builds a set from atom names, resolving each name against `universe`.
    pub fn from_names<T, S>(universe: &Universe, arity: usize, tuples: T) -> Result<Self, KernelError>
    where
        T: IntoIterator,
        T::Item: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        if arity == 0 {
            return Err(KernelError::ArityMismatch { expected: 1, found: 0 });
        }
        let mut set = TupleSet::empty(universe, arity);
        for tuple in tuples {
            let ordinals = tuple
                .into_iter()
                .map(|name| universe.ordinal(name.as_ref()))
                .collect::<Result<Tuple, _>>()?;
            if ordinals.len() != arity {
                return Err(KernelError::ArityMismatch {
                    expected: arity,
                    found: ordinals.len(),
                });
            }
            set.tuples.insert(ordinals);
        }
        Ok(set)
    }

    pub fn from_tuples<I>(universe: &Universe, arity: usize, tuples: I) -> Result<Self, KernelError>
    where
        I: IntoIterator<Item = Tuple>,
    {
        let mut set = TupleSet::empty(universe, arity);
        for t in tuples {
            set.insert(t)?;
        }
        Ok(set)
    }

    /// The arity-1 set containing every atom.
    pub fn univ(universe: &Universe) -> Self {
        let mut set = TupleSet::empty(universe, 1);
        set.tuples.extend((0..universe.size()).map(|i| vec![i]));
        set
    }

    pub fn singleton(universe: &Universe, atom: usize) -> Self {
        let mut set = TupleSet::empty(universe, 1);
        set.tuples.insert(vec![atom]);
        set
    }

    pub fn insert(&mut self, tuple: Tuple) -> Result<bool, KernelError> {
        if tuple.len() != self.arity {
            return Err(KernelError::ArityMismatch {
                expected: self.arity,
                found: tuple.len(),
            });
        }
        if let Some(&bad) = tuple.iter().find(|&&a| a >= self.universe.size()) {
            return Err(KernelError::UnknownAtom(format!("#{bad}")));
        }
        Ok(self.tuples.insert(tuple))
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn contains(&self, tuple: &[usize]) -> bool {
        self.tuples.contains(tuple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Tuple> + '_ {
        self.tuples.iter()
    }

    pub fn tuples(&self) -> &BTreeSet<Tuple> {
        &self.tuples
    }

    pub fn is_subset(&self, other: &TupleSet) -> bool {
        self.tuples.is_subset(&other.tuples)
    }

    /// Tuples rendered as atom names.
    pub fn names(&self) -> Vec<Vec<&str>> {
        self.tuples
            .iter()
            .map(|t| t.iter().map(|&a| self.universe.atom(a)).collect())
            .collect()
    }

    fn with_tuples(&self, arity: usize, tuples: BTreeSet<Tuple>) -> TupleSet {
        TupleSet {
            universe: self.universe.clone(),
            arity,
            tuples,
        }
    }

    pub fn union(&self, other: &TupleSet) -> TupleSet {
        debug_assert_eq!(self.arity, other.arity);
        self.with_tuples(self.arity, &self.tuples | &other.tuples)
    }

    pub fn intersection(&self, other: &TupleSet) -> TupleSet {
        debug_assert_eq!(self.arity, other.arity);
        self.with_tuples(self.arity, &self.tuples & &other.tuples)
    }

    pub fn difference(&self, other: &TupleSet) -> TupleSet {
        debug_assert_eq!(self.arity, other.arity);
        self.with_tuples(self.arity, &self.tuples - &other.tuples)
    }

    /// Relational join: matches the last column of `self` with the first
    /// column of `other` and drops both.
    pub fn join(&self, other: &TupleSet) -> TupleSet {
        let arity = self.arity + other.arity - 2;
        debug_assert!(arity >= 1);
        let mut by_head: BTreeMap<usize, Vec<&Tuple>> = BTreeMap::new();
        for t in &other.tuples {
            by_head.entry(t[0]).or_default().push(t);
        }
        let mut out = BTreeSet::new();
        for left in &self.tuples {
            let (last, prefix) = left.split_last().expect("non-empty tuple");
            if let Some(rights) = by_head.get(last) {
                for right in rights {
                    let mut t = prefix.to_vec();
                    t.extend_from_slice(&right[1..]);
                    out.insert(t);
                }
            }
        }
        self.with_tuples(arity, out)
    }

    pub fn product(&self, other: &TupleSet) -> TupleSet {
        let mut out = BTreeSet::new();
        for l in &self.tuples {
            for r in &other.tuples {
                let mut t = l.clone();
                t.extend_from_slice(r);
                out.insert(t);
            }
        }
        self.with_tuples(self.arity + other.arity, out)
    }

    pub fn transpose(&self) -> TupleSet {
        debug_assert_eq!(self.arity, 2);
        let out = self.tuples.iter().map(|t| vec![t[1], t[0]]).collect();
        self.with_tuples(2, out)
    }

    /// Least transitive relation containing `self`.
    pub fn closure(&self) -> TupleSet {
        debug_assert_eq!(self.arity, 2);
        let mut acc = self.clone();
        loop {
            let next = acc.union(&acc.join(&acc));
            if next.len() == acc.len() {
                return acc;
            }
            acc = next;
        }
    }

    /// Keeps the listed (0-based) columns, in the listed order.
    pub fn project(&self, columns: &[usize]) -> TupleSet {
        let out = self
            .tuples
            .iter()
            .map(|t| columns.iter().map(|&c| t[c]).collect())
            .collect();
        self.with_tuples(columns.len(), out)
    }
}

impl fmt::Display for TupleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, t) in self.tuples.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (j, &a) in t.iter().enumerate() {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.universe.atom(a))?;
            }
            write!(f, ")")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for TupleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TupleSet/{}{}", self.arity, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Universe {
        Universe::new(["a", "b"]).unwrap()
    }

    #[test]
    fn build_from_names() {
        let s = TupleSet::from_names(&ab(), 2, [["a", "b"]]).unwrap();
        assert_eq!(s.tuples().iter().collect::<Vec<_>>(), vec![&vec![0, 1]]);
    }

    #[test]
    fn empty_set() {
        let u = Universe::new(["a"]).unwrap();
        let s = TupleSet::from_names(&u, 1, Vec::<Vec<&str>>::new()).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.arity(), 1);
    }

    #[test]
    fn unknown_atom() {
        let u = Universe::new(["a"]).unwrap();
        let err = TupleSet::from_names(&u, 2, [["a", "c"]]).unwrap_err();
        assert_eq!(err, KernelError::UnknownAtom("c".into()));
    }

    #[test]
    fn ragged_tuple() {
        let err = TupleSet::from_names(&ab(), 2, [vec!["a"]]).unwrap_err();
        assert_eq!(err, KernelError::ArityMismatch { expected: 2, found: 1 });
    }

    #[test]
    fn duplicates_collapse() {
        let s = TupleSet::from_names(&ab(), 1, [["a"], ["a"], ["b"]]).unwrap();
        assert_eq!(s.len(), 2);
    }

    #[test]
    fn closure_of_chain() {
        let u = Universe::new(["0", "1", "2"]).unwrap();
        let r = TupleSet::from_names(&u, 2, [["0", "1"], ["1", "2"]]).unwrap();
        let expected = TupleSet::from_names(&u, 2, [["0", "1"], ["1", "2"], ["0", "2"]]).unwrap();
        assert_eq!(r.closure(), expected);
    }

    #[test]
    fn join_and_project() {
        let u = Universe::new(["a", "b", "c"]).unwrap();
        let r = TupleSet::from_names(&u, 2, [["a", "b"], ["b", "c"]]).unwrap();
        let x = TupleSet::from_names(&u, 1, [["a"]]).unwrap();
        assert_eq!(x.join(&r), TupleSet::from_names(&u, 1, [["b"]]).unwrap());
        assert_eq!(
            r.project(&[1, 0]),
            TupleSet::from_names(&u, 2, [["b", "a"], ["c", "b"]]).unwrap()
        );
    }
}
