use std::fmt;
use std::sync::Arc;

/// What a relation stands for; only affects reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelationKind {
    Class,
    Feature,
    Builtin,
    Internal,
}

/// A named relation of fixed arity. Relations are compared by value.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Relation {
    name: Arc<str>,
    arity: usize,
    kind: RelationKind,
}

impl Relation {
    pub fn new(name: impl Into<Arc<str>>, arity: usize, kind: RelationKind) -> Self {
        assert!(arity >= 1, "relations have positive arity");
        Relation {
            name: name.into(),
            arity,
            kind,
        }
    }

    pub fn unary(name: impl Into<Arc<str>>) -> Self {
        Relation::new(name, 1, RelationKind::Class)
    }

    pub fn binary(name: impl Into<Arc<str>>) -> Self {
        Relation::new(name, 2, RelationKind::Feature)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn kind(&self) -> RelationKind {
        self.kind
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
