use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;

use super::{Bounds, KernelError, Relation, TupleSet, Universe};

pub const DEFAULT_BITWIDTH: u32 = 8;

/// A total valuation of a problem's relations.
#[derive(Clone, PartialEq, Eq)]
pub struct ConcreteInstance {
    universe: Universe,
    valuation: IndexMap<Relation, TupleSet>,
    ints: BTreeMap<i64, usize>,
    bitwidth: u32,
}

impl ConcreteInstance {
    pub fn new(universe: Universe, bitwidth: u32) -> Self {
        assert!((1..=32).contains(&bitwidth), "bitwidth must lie in 1..=32");
        ConcreteInstance {
            universe,
            valuation: IndexMap::new(),
            ints: BTreeMap::new(),
            bitwidth,
        }
    }

    /// The instance that assigns every relation its lower bound.
    pub fn from_lower_bounds(bounds: &Bounds, bitwidth: u32) -> Self {
        let mut inst = ConcreteInstance::new(bounds.universe().clone(), bitwidth);
        for (r, lower, _) in bounds.entries() {
            inst.valuation.insert(r.clone(), lower.clone());
        }
        inst.ints = bounds.ints().clone();
        inst
    }

    pub fn set(&mut self, relation: &Relation, value: TupleSet) -> Result<(), KernelError> {
        if value.arity() != relation.arity() {
            return Err(KernelError::ArityMismatch {
                expected: relation.arity(),
                found: value.arity(),
            });
        }
        if value.universe() != &self.universe {
            return Err(KernelError::UniverseMismatch);
        }
        self.valuation.insert(relation.clone(), value);
        Ok(())
    }

    pub fn set_ints(&mut self, ints: BTreeMap<i64, usize>) {
        self.ints = ints;
    }

    pub fn get(&self, relation: &Relation) -> Option<&TupleSet> {
        self.valuation.get(relation)
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn ints(&self) -> &BTreeMap<i64, usize> {
        &self.ints
    }

    pub fn int_value(&self, atom: usize) -> Option<i64> {
        self.ints.iter().find(|(_, &a)| a == atom).map(|(&v, _)| v)
    }

    pub fn bitwidth(&self) -> u32 {
        self.bitwidth
    }

    pub fn relations(&self) -> impl Iterator<Item = (&Relation, &TupleSet)> + '_ {
        self.valuation.iter()
    }
}

impl fmt::Debug for ConcreteInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (r, v) in &self.valuation {
            m.entry(&r.name(), &format_args!("{v}"));
        }
        m.finish()
    }
}
