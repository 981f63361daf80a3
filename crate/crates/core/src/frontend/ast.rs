//! Syntax tree of a `.aie` metamodel. Invariant bodies reuse the kernel
//! formula AST with every name left as an unresolved variable.

use std::fmt;
use std::sync::Arc;

use crate::kernel::{Formula, Multiplicity};
use crate::span::SourceSpan;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MetamodelAst {
    pub file: Arc<str>,
    pub packages: Vec<Package>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Package {
    pub name: String,
    pub span: SourceSpan,
    pub packages: Vec<Package>,
    pub classifiers: Vec<Classifier>,
    pub invariants: Vec<Invariant>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classifier {
    Class(ClassDecl),
    DataType(DataTypeDecl),
    Enum(EnumDecl),
}

impl Classifier {
    pub fn name(&self) -> &str {
        match self {
            Classifier::Class(c) => &c.name,
            Classifier::DataType(d) => &d.name,
            Classifier::Enum(e) => &e.name,
        }
    }

    pub fn span(&self) -> &SourceSpan {
        match self {
            Classifier::Class(c) => &c.span,
            Classifier::DataType(d) => &d.span,
            Classifier::Enum(e) => &e.span,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    /// Span of the class name.
    pub span: SourceSpan,
    pub is_abstract: bool,
    pub cardinality: Option<(Multiplicity, SourceSpan)>,
    pub params: Vec<TypeParam>,
    pub extends: Vec<TypeRef>,
    pub bound: Option<ClassBound>,
    pub features: Vec<Feature>,
    pub invariants: Vec<Invariant>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassBound {
    pub min: u32,
    pub max: u32,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeParam {
    pub name: String,
    pub bounds: Vec<TypeRef>,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WildcardKind {
    Extends,
    Super,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TypeRef {
    Named {
        name: String,
        args: Vec<TypeRef>,
        span: SourceSpan,
    },
    Wildcard {
        bound: Option<(WildcardKind, Box<TypeRef>)>,
        span: SourceSpan,
    },
}

impl TypeRef {
    pub fn span(&self) -> &SourceSpan {
        match self {
            TypeRef::Named { span, .. } | TypeRef::Wildcard { span, .. } => span,
        }
    }
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Named { name, args, .. } => {
                f.write_str(name)?;
                if !args.is_empty() {
                    f.write_str("<")?;
                    for (i, a) in args.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{a}")?;
                    }
                    f.write_str(">")?;
                }
                Ok(())
            }
            TypeRef::Wildcard { bound: None, .. } => f.write_str("?"),
            TypeRef::Wildcard {
                bound: Some((kind, t)), ..
            } => {
                let kw = match kind {
                    WildcardKind::Extends => "extends",
                    WildcardKind::Super => "super",
                };
                write!(f, "? {kw} {t}")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureKind {
    Attribute,
    Property,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Qualifier {
    Model,
    Ghost,
    /// Not part of the core grammar; accepted with a warning.
    Nullable,
}

impl Qualifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Qualifier::Model => "model",
            Qualifier::Ghost => "ghost",
            Qualifier::Nullable => "nullable",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Flag {
    Id,
    Derived,
    Composes,
}

impl Flag {
    pub fn keyword(self) -> &'static str {
        match self {
            Flag::Id => "id",
            Flag::Derived => "derived",
            Flag::Composes => "composes",
        }
    }
}

/// Relation properties that expand into formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Prop {
    Acyclic,
    Transitive,
    Reflexive,
    Irreflexive,
    Symmetric,
    Asymmetric,
    Antisymmetric,
    Total,
    Functional,
    Surjective,
    Injective,
    Bijective,
    Complete,
    Bijection,
    Preorder,
    Equivalence,
    PartialOrder,
    TotalOrder,
}

impl Prop {
    pub const ALL: [Prop; 18] = [
        Prop::Acyclic,
        Prop::Transitive,
        Prop::Reflexive,
        Prop::Irreflexive,
        Prop::Symmetric,
        Prop::Asymmetric,
        Prop::Antisymmetric,
        Prop::Total,
        Prop::Functional,
        Prop::Surjective,
        Prop::Injective,
        Prop::Bijective,
        Prop::Complete,
        Prop::Bijection,
        Prop::Preorder,
        Prop::Equivalence,
        Prop::PartialOrder,
        Prop::TotalOrder,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Prop::Acyclic => "acyclic",
            Prop::Transitive => "transitive",
            Prop::Reflexive => "reflexive",
            Prop::Irreflexive => "irreflexive",
            Prop::Symmetric => "symmetric",
            Prop::Asymmetric => "asymmetric",
            Prop::Antisymmetric => "antisymmetric",
            Prop::Total => "total",
            Prop::Functional => "functional",
            Prop::Surjective => "surjective",
            Prop::Injective => "injective",
            Prop::Bijective => "bijective",
            Prop::Complete => "complete",
            Prop::Bijection => "bijection",
            Prop::Preorder => "preorder",
            Prop::Equivalence => "equivalence",
            Prop::PartialOrder => "partialorder",
            Prop::TotalOrder => "totalorder",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Prop> {
        Prop::ALL.into_iter().find(|p| p.keyword() == s)
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// `[n]`, `[m..n]`, `[m..*]`, `[*]`, `[+]` or `[?]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultSpec {
    pub lower: u32,
    /// None means unbounded.
    pub upper: Option<u32>,
    pub span: SourceSpan,
}

impl fmt::Display for MultSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.lower, self.upper) {
            (0, None) => f.write_str("[*]"),
            (1, None) => f.write_str("[+]"),
            (0, Some(1)) => f.write_str("[?]"),
            (m, Some(n)) if m == n => write!(f, "[{m}]"),
            (m, Some(n)) => write!(f, "[{m}..{n}]"),
            (m, None) => write!(f, "[{m}..*]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Feature {
    pub kind: FeatureKind,
    pub qualifiers: Vec<(Qualifier, SourceSpan)>,
    pub cardinality: Option<(Multiplicity, SourceSpan)>,
    pub name: String,
    /// Span of the feature name.
    pub span: SourceSpan,
    pub ty: TypeRef,
    pub mult: MultSpec,
    pub flags: Vec<(Flag, SourceSpan)>,
    pub props: Vec<(Prop, SourceSpan)>,
}

impl Feature {
    pub fn has_qualifier(&self, q: Qualifier) -> bool {
        self.qualifiers.iter().any(|(x, _)| *x == q)
    }

    pub fn flag(&self, f: Flag) -> Option<&SourceSpan> {
        self.flags.iter().find(|(x, _)| *x == f).map(|(_, s)| s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DataTypeDecl {
    pub name: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumDecl {
    pub name: String,
    pub span: SourceSpan,
    pub literals: Vec<(String, SourceSpan)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Invariant {
    pub name: Option<String>,
    /// Span of the `invariant` keyword through the name, if any.
    pub span: SourceSpan,
    pub formula: Formula,
}

impl MetamodelAst {
    /// Every classifier in every package, depth first.
    pub fn classifiers(&self) -> Vec<&Classifier> {
        fn walk<'a>(p: &'a Package, out: &mut Vec<&'a Classifier>) {
            out.extend(p.classifiers.iter());
            for q in &p.packages {
                walk(q, out);
            }
        }
        let mut out = Vec::new();
        for p in &self.packages {
            walk(p, &mut out);
        }
        out
    }
}
