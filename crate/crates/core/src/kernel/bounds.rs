use std::collections::BTreeMap;

use indexmap::IndexMap;

use super::{KernelError, Relation, TupleSet, Universe};

/// Per-relation lower and upper tuple sets over a shared universe, plus the
/// atoms that stand for integers.
#[derive(Clone, Debug)]
pub struct Bounds {
    universe: Universe,
    entries: IndexMap<Relation, (TupleSet, TupleSet)>,
    ints: BTreeMap<i64, usize>,
}

impl Bounds {
    pub fn new(universe: Universe) -> Self {
        Bounds {
            universe,
            entries: IndexMap::new(),
            ints: BTreeMap::new(),
        }
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    /// Records `lower ⊆ r ⊆ upper`. Rebinding a relation replaces its entry.
    pub fn bound(&mut self, relation: &Relation, lower: TupleSet, upper: TupleSet) -> Result<(), KernelError> {
        for set in [&lower, &upper] {
            if set.arity() != relation.arity() {
                return Err(KernelError::ArityMismatch {
                    expected: relation.arity(),
                    found: set.arity(),
                });
            }
            if set.universe() != &self.universe {
                return Err(KernelError::UniverseMismatch);
            }
        }
        if !lower.is_subset(&upper) {
            let offending = lower
                .difference(&upper)
                .names()
                .into_iter()
                .map(|t| t.into_iter().map(str::to_string).collect())
                .collect();
            return Err(KernelError::BoundViolation(offending));
        }
        self.entries.insert(relation.clone(), (lower, upper));
        Ok(())
    }

    pub fn bound_exactly(&mut self, relation: &Relation, set: TupleSet) -> Result<(), KernelError> {
        self.bound(relation, set.clone(), set)
    }

    /// Declares that atom `ordinal` denotes the integer `value`.
    pub fn bind_int(&mut self, value: i64, ordinal: usize) -> Result<(), KernelError> {
        if ordinal >= self.universe.size() {
            return Err(KernelError::UnknownAtom(format!("#{ordinal}")));
        }
        self.ints.insert(value, ordinal);
        Ok(())
    }

    pub fn ints(&self) -> &BTreeMap<i64, usize> {
        &self.ints
    }

    pub fn lower(&self, relation: &Relation) -> Option<&TupleSet> {
        self.entries.get(relation).map(|(l, _)| l)
    }

    pub fn upper(&self, relation: &Relation) -> Option<&TupleSet> {
        self.entries.get(relation).map(|(_, u)| u)
    }

    pub fn get(&self, relation: &Relation) -> Option<(&TupleSet, &TupleSet)> {
        self.entries.get(relation).map(|(l, u)| (l, u))
    }

    pub fn relations(&self) -> impl Iterator<Item = &Relation> + '_ {
        self.entries.keys()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Relation, &TupleSet, &TupleSet)> + '_ {
        self.entries.iter().map(|(r, (l, u))| (r, l, u))
    }

    pub fn contains(&self, relation: &Relation) -> bool {
        self.entries.contains_key(relation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Universe {
        Universe::new(["a", "b", "c"]).unwrap()
    }

    #[test]
    fn exact_bound() {
        let u = abc();
        let r = Relation::unary("r");
        let mut b = Bounds::new(u.clone());
        b.bound_exactly(&r, TupleSet::from_names(&u, 1, [["a"]]).unwrap())
            .unwrap();
        assert_eq!(b.lower(&r), b.upper(&r));
    }

    #[test]
    fn optional_tuples() {
        let u = abc();
        let r = Relation::binary("r");
        let mut b = Bounds::new(u.clone());
        let lower = TupleSet::from_names(&u, 2, [["a", "b"]]).unwrap();
        let upper = TupleSet::from_names(&u, 2, [["a", "b"], ["b", "c"]]).unwrap();
        b.bound(&r, lower, upper).unwrap();
        assert_eq!(b.upper(&r).unwrap().len(), 2);
    }

    #[test]
    fn lower_not_in_upper() {
        let u = abc();
        let r = Relation::binary("r");
        let mut b = Bounds::new(u.clone());
        let lower = TupleSet::from_names(&u, 2, [["a", "b"]]).unwrap();
        let upper = TupleSet::from_names(&u, 2, [["b", "c"]]).unwrap();
        assert_eq!(
            b.bound(&r, lower, upper).unwrap_err(),
            KernelError::BoundViolation(vec![vec!["a".into(), "b".into()]])
        );
    }

    #[test]
    fn arity_must_match() {
        let u = abc();
        let r = Relation::binary("r");
        let mut b = Bounds::new(u.clone());
        let set = TupleSet::from_names(&u, 1, [["a"]]).unwrap();
        assert!(matches!(
            b.bound_exactly(&r, set),
            Err(KernelError::ArityMismatch { expected: 2, found: 1 })
        ));
    }
}
