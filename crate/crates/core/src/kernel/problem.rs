use std::fmt;

use super::{Formula, Relation};
use crate::span::SourceSpan;

/// Where a constraint came from; drives explanation ordering and labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Structure,
    Multiplicity,
    Cardinality,
    Invariant,
    Qualifier,
    Fact,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Structure => "structure",
            Category::Multiplicity => "multiplicity",
            Category::Cardinality => "cardinality",
            Category::Invariant => "invariant",
            Category::Qualifier => "qualifier",
            Category::Fact => "fact",
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConstraintId(pub usize);

impl fmt::Display for ConstraintId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0)
    }
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub id: ConstraintId,
    /// Short human label, e.g. `acyclic cdr`.
    pub label: String,
    pub formula: Formula,
    pub span: Option<SourceSpan>,
    pub category: Category,
}

/// Declared relations plus the constraints that must hold over them.
#[derive(Clone, Debug, Default)]
pub struct RelationalProblem {
    pub relations: Vec<Relation>,
    pub constraints: Vec<Constraint>,
}

impl RelationalProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn declare(&mut self, relation: Relation) {
        if !self.relations.contains(&relation) {
            self.relations.push(relation);
        }
    }

    pub fn add(
        &mut self,
        label: impl Into<String>,
        formula: Formula,
        span: Option<SourceSpan>,
        category: Category,
    ) -> ConstraintId {
        let id = ConstraintId(self.constraints.len());
        self.constraints.push(Constraint {
            id,
            label: label.into(),
            formula,
            span,
            category,
        });
        id
    }

    pub fn constraint(&self, id: ConstraintId) -> &Constraint {
        &self.constraints[id.0]
    }

    pub fn relation(&self, name: &str) -> Option<&Relation> {
        self.relations.iter().find(|r| r.name() == name)
    }
}
