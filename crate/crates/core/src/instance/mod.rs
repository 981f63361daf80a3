//! Partial instance models: the `.ais` format, universe and bounds
//! construction, and completion reports.

mod bounds;
mod completion;
mod parse;

use std::fmt;
use std::sync::Arc;

use crate::frontend::{enum_atom, int_atom, string_atom};
use crate::kernel::Relation;
use crate::span::SourceSpan;

pub use bounds::{build_bounds, BoundProblem, FactRef, ScopeConfig, DEFAULT_SCOPE};
pub use completion::{diff_completion, serialize_instance, CompletionError, CompletionReport, LinkFact};
pub use parse::parse_instance;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ObjectDecl {
    pub name: String,
    /// Concrete monomorphic class.
    pub class: String,
    pub span: SourceSpan,
}

/// The right-hand side of a link assertion.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LinkTarget {
    Object(String),
    Str(String),
    Int(i64),
    Enum(String, String),
}

impl LinkTarget {
    /// The atom this target denotes.
    pub fn atom(&self) -> String {
        match self {
            LinkTarget::Object(o) => o.clone(),
            LinkTarget::Str(s) => string_atom(s),
            LinkTarget::Int(v) => int_atom(*v),
            LinkTarget::Enum(e, l) => enum_atom(e, l),
        }
    }
}

impl fmt::Display for LinkTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.atom())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Link {
    pub source: String,
    /// Feature name as written.
    pub feature: String,
    pub relation: Relation,
    pub target: LinkTarget,
    pub span: SourceSpan,
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{} = {}", self.source, self.feature, self.target)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialInstance {
    pub name: String,
    pub package: String,
    pub file: Arc<str>,
    pub objects: Vec<ObjectDecl>,
    pub links: Vec<Link>,
}

impl PartialInstance {
    pub fn empty(package: &str) -> Self {
        PartialInstance {
            name: "empty".into(),
            package: package.into(),
            file: Arc::from("<empty>"),
            objects: Vec::new(),
            links: Vec::new(),
        }
    }

    pub fn object(&self, name: &str) -> Option<&ObjectDecl> {
        self.objects.iter().find(|o| o.name == name)
    }
}
