//! Name resolution, monomorphization of generic classes, and column-type
//! checking of invariants.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use indexmap::IndexMap;

use super::ast::*;
use super::diagnostics::{Diagnostic, DiagnosticKind, Diagnostics};
use crate::kernel::{
    Decl, Expr, ExprKind, Formula, FormulaKind, IntExpr, IntExprKind, Multiplicity, Relation, RelationKind, Variable,
};
use crate::span::SourceSpan;

/// Upper limit on generic instantiations, to stop runaway expansion such as
/// `class A<T> { property next : A<A<T>> [?]; }`.
pub const MAX_INSTANTIATIONS: usize = 256;

/// A resolved, monomorphic type.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Class(String),
    String,
    Int,
    Enum(String),
    Data(String),
}

impl Ty {
    pub fn is_class(&self) -> bool {
        matches!(self, Ty::Class(_))
    }
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Class(n) | Ty::Enum(n) | Ty::Data(n) => f.write_str(n),
            Ty::String => f.write_str("String"),
            Ty::Int => f.write_str("Int"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClassInfo {
    /// Monomorphic name, e.g. `List<EnginedVehicle>`.
    pub name: String,
    /// Declared name, e.g. `List`.
    pub base: String,
    pub args: Vec<Ty>,
    pub is_abstract: bool,
    pub supers: Vec<String>,
    pub ancestors: BTreeSet<String>,
    pub span: SourceSpan,
}

/// A cardinality keyword or `[m, n]` bound on a class. For a generic class
/// it constrains the union of its instantiations.
#[derive(Clone, Debug)]
pub struct ClassCardinality {
    pub base: String,
    pub classes: Vec<String>,
    pub kind: CardinalityKind,
    pub span: SourceSpan,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CardinalityKind {
    Keyword(Multiplicity),
    Range(u32, u32),
}

#[derive(Clone, Debug)]
pub struct FeatureInfo {
    pub name: String,
    /// Declared name of the owning class.
    pub declaring_class: String,
    pub kind: FeatureKind,
    pub relation: Relation,
    /// Monomorphic owners; the feature's domain is their union.
    pub owners: Vec<String>,
    /// Union of the per-owner targets.
    pub target: BTreeSet<Ty>,
    pub owner_targets: Vec<(String, BTreeSet<Ty>)>,
    pub mult: MultSpec,
    pub cardinality: Option<(Multiplicity, SourceSpan)>,
    pub model: bool,
    pub nullable: bool,
    pub derived: Option<SourceSpan>,
    pub composes: Option<SourceSpan>,
    pub id: Option<SourceSpan>,
    pub props: Vec<(Prop, SourceSpan)>,
    pub span: SourceSpan,
}

impl FeatureInfo {
    /// Facts for this feature are inferred, never asserted.
    pub fn inferred_only(&self) -> bool {
        self.model
    }

    pub fn is_attribute(&self) -> bool {
        self.kind == FeatureKind::Attribute
    }
}

#[derive(Clone, Debug)]
pub struct InvariantInfo {
    pub name: Option<String>,
    pub owner: Option<String>,
    pub formula: Formula,
    pub span: SourceSpan,
}

impl InvariantInfo {
    pub fn label(&self) -> String {
        match (&self.owner, &self.name) {
            (Some(o), Some(n)) => format!("invariant {o}.{n}"),
            (None, Some(n)) => format!("invariant {n}"),
            (Some(o), None) => format!("invariant in {o}"),
            (None, None) => "invariant".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ResolvedMetamodel {
    pub file: Arc<str>,
    pub package: String,
    /// Monomorphic classes keyed by name, in sorted order.
    pub classes: IndexMap<String, ClassInfo>,
    pub cardinalities: Vec<ClassCardinality>,
    pub features: Vec<FeatureInfo>,
    pub invariants: Vec<InvariantInfo>,
    /// Enumerations including the built-in `Boolean`.
    pub enums: IndexMap<String, Vec<String>>,
    pub datatypes: Vec<String>,
    /// String literals mentioned anywhere in the metamodel.
    pub strings: BTreeSet<String>,
    /// Integer literals mentioned anywhere in the metamodel.
    pub int_literals: BTreeSet<i64>,
    /// Whether integer atoms are needed: an `Int` attribute, `sum` or `int2expr`.
    pub uses_int_atoms: bool,
    /// Declared names of generic classes and their instantiations.
    pub generics: BTreeMap<String, Vec<String>>,
    pub warnings: Vec<Diagnostic>,
}

pub fn class_relation(name: &str) -> Relation {
    Relation::new(name, 1, RelationKind::Class)
}

/// The built-in relation from each object to its class atom.
pub fn class_builtin() -> Relation {
    Relation::new("class", 2, RelationKind::Internal)
}

/// The atom standing for a concrete class in the range of `class`.
pub fn class_atom(name: &str) -> String {
    format!("@{name}")
}

pub fn class_atom_relation(name: &str) -> Relation {
    Relation::new(class_atom(name), 1, RelationKind::Builtin)
}

pub fn string_atom(s: &str) -> String {
    format!("\"{s}\"")
}

pub fn string_relation(s: &str) -> Relation {
    Relation::new(string_atom(s), 1, RelationKind::Builtin)
}

pub fn enum_atom(e: &str, lit: &str) -> String {
    format!("{e}::{lit}")
}

pub fn enum_literal_relation(e: &str, lit: &str) -> Relation {
    Relation::new(enum_atom(e, lit), 1, RelationKind::Builtin)
}

/// Atom for an integer value.
pub fn int_atom(v: i64) -> String {
    v.to_string()
}

/// Relation holding every atom of a literal type.
pub fn pool_relation(ty: &Ty) -> Relation {
    match ty {
        Ty::Class(c) => class_relation(c),
        other => Relation::new(other.to_string(), 1, RelationKind::Builtin),
    }
}

impl ResolvedMetamodel {
    pub fn class(&self, name: &str) -> Option<&ClassInfo> {
        self.classes.get(name)
    }

    pub fn is_subclass(&self, sub: &str, sup: &str) -> bool {
        sub == sup || self.classes.get(sub).is_some_and(|c| c.ancestors.contains(sup))
    }

    pub fn concrete_classes(&self) -> Vec<&str> {
        self.classes
            .values()
            .filter(|c| !c.is_abstract)
            .map(|c| c.name.as_str())
            .collect()
    }

    /// Concrete classes at or below `class`.
    pub fn concrete_below(&self, class: &str) -> Vec<&str> {
        self.classes
            .values()
            .filter(|c| !c.is_abstract && self.is_subclass(&c.name, class))
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn direct_subclasses(&self, class: &str) -> Vec<&str> {
        self.classes
            .values()
            .filter(|c| c.supers.iter().any(|s| s == class))
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn feature_by_relation(&self, relation: &str) -> Option<&FeatureInfo> {
        self.features.iter().find(|f| f.relation.name() == relation)
    }

    /// Non-ghost features an object of `class` carries, own and inherited.
    pub fn features_of(&self, class: &str) -> Vec<&FeatureInfo> {
        self.features
            .iter()
            .filter(|f| f.owners.iter().any(|o| self.is_subclass(class, o)))
            .collect()
    }

    pub fn feature_named(&self, class: &str, name: &str) -> Option<&FeatureInfo> {
        self.features_of(class).into_iter().find(|f| f.name == name)
    }

    /// Union of the relations of `classes`, or `None` when empty.
    pub fn union_of_classes<'a>(&self, classes: impl IntoIterator<Item = &'a str>) -> Option<Expr> {
        Expr::union_all(classes.into_iter().map(|c| Expr::rel(&class_relation(c))))
    }

    pub fn ty_expr(&self, ty: &Ty) -> Expr {
        Expr::rel(&pool_relation(ty))
    }

    pub fn tys_expr(&self, tys: &BTreeSet<Ty>) -> Option<Expr> {
        Expr::union_all(tys.iter().map(|t| self.ty_expr(t)))
    }

    pub fn domain_expr(&self, f: &FeatureInfo) -> Expr {
        self.union_of_classes(f.owners.iter().map(String::as_str))
            .expect("every feature has an owner")
    }

    /// Whether a value of type `ty` may be an atom of `target`.
    pub fn ty_fits(&self, value: &Ty, target: &BTreeSet<Ty>) -> bool {
        target.iter().any(|t| match (value, t) {
            (Ty::Class(a), Ty::Class(b)) => self.is_subclass(a, b),
            (a, b) => a == b,
        })
    }

    /// Every object relation: the concrete classes.
    pub fn objects_expr(&self) -> Option<Expr> {
        self.union_of_classes(self.concrete_classes())
    }
}

fn builtin_ty(name: &str) -> Option<Ty> {
    match name {
        "String" | "EString" => Some(Ty::String),
        "Int" | "EInt" | "Integer" | "EInteger" => Some(Ty::Int),
        "Boolean" | "EBoolean" => Some(Ty::Enum("Boolean".into())),
        _ => None,
    }
}

#[derive(Clone, Copy)]
enum DeclRef<'a> {
    Class(&'a ClassDecl),
    DataType,
    Enum,
}

struct Mono<'a> {
    base: String,
    args: Vec<Ty>,
    decl: &'a ClassDecl,
    subst: HashMap<String, Ty>,
    span: SourceSpan,
}

/// Column types: which atom kinds may occupy each column.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Atomic {
    Obj(String),
    Lit(Ty),
    ClassAtom,
}

type Cols = Vec<BTreeSet<Atomic>>;

struct Resolver<'a> {
    ast: &'a MetamodelAst,
    decls: HashMap<String, DeclRef<'a>>,
    monos: IndexMap<String, Mono<'a>>,
    instances: HashMap<(String, Vec<Ty>), String>,
    worklist: VecDeque<String>,
    errors: Vec<Diagnostic>,
    warnings: Vec<Diagnostic>,
    limit_reported: bool,
    classes: IndexMap<String, ClassInfo>,
    features: Vec<FeatureInfo>,
    ghosts: BTreeSet<String>,
    enums: IndexMap<String, Vec<String>>,
    datatypes: Vec<String>,
    strings: BTreeSet<String>,
    int_literals: BTreeSet<i64>,
    uses_int_atoms: bool,
}

fn err(kind: DiagnosticKind, span: &SourceSpan, msg: impl Into<String>) -> Diagnostic {
    Diagnostic::error(kind, Some(span.clone()), msg)
}

impl<'a> Resolver<'a> {
    fn new(ast: &'a MetamodelAst) -> Self {
        Resolver {
            ast,
            decls: HashMap::new(),
            monos: IndexMap::new(),
            instances: HashMap::new(),
            worklist: VecDeque::new(),
            errors: Vec::new(),
            warnings: Vec::new(),
            limit_reported: false,
            classes: IndexMap::new(),
            features: Vec::new(),
            ghosts: BTreeSet::new(),
            enums: IndexMap::new(),
            datatypes: Vec::new(),
            strings: BTreeSet::new(),
            int_literals: BTreeSet::new(),
            uses_int_atoms: false,
        }
    }

    fn declare(&mut self) {
        self.enums.insert("Boolean".into(), vec!["true".into(), "false".into()]);
        let mut all: Vec<&'a Classifier> = self.ast.classifiers();
        all.sort_by(|a, b| a.name().cmp(b.name()));
        for c in all {
            let name = c.name();
            if builtin_ty(name).is_some() || name == "class" || self.decls.contains_key(name) {
                self.errors.push(err(
                    DiagnosticKind::DuplicateName,
                    c.span(),
                    format!("`{name}` is already defined"),
                ));
                continue;
            }
            let r = match c {
                Classifier::Class(d) => DeclRef::Class(d),
                Classifier::DataType(d) => {
                    self.datatypes.push(d.name.clone());
                    DeclRef::DataType
                }
                Classifier::Enum(e) => {
                    self.enums
                        .insert(e.name.clone(), e.literals.iter().map(|(l, _)| l.clone()).collect());
                    DeclRef::Enum
                }
            };
            self.decls.insert(name.to_string(), r);
        }
    }

    // ---- monomorphization ----

    fn instantiate(&mut self, base: &str, args: Vec<Ty>, span: &SourceSpan) -> Option<String> {
        if let Some(n) = self.instances.get(&(base.to_string(), args.clone())) {
            return Some(n.clone());
        }
        let Some(DeclRef::Class(decl)) = self.decls.get(base).copied() else {
            return None;
        };
        if self.monos.len() >= MAX_INSTANTIATIONS {
            if !self.limit_reported {
                self.limit_reported = true;
                self.errors.push(err(
                    DiagnosticKind::InstantiationLimit,
                    span,
                    format!("more than {MAX_INSTANTIATIONS} class instantiations; is a generic type recursive?"),
                ));
            }
            return None;
        }
        let name = if args.is_empty() {
            base.to_string()
        } else {
            let a: Vec<String> = args.iter().map(Ty::to_string).collect();
            format!("{base}<{}>", a.join(", "))
        };
        let subst = decl
            .params
            .iter()
            .map(|p| p.name.clone())
            .zip(args.iter().cloned())
            .collect();
        self.monos.insert(
            name.clone(),
            Mono {
                base: base.to_string(),
                args: args.clone(),
                decl,
                subst,
                span: span.clone(),
            },
        );
        self.instances.insert((base.to_string(), args), name.clone());
        self.worklist.push_back(name.clone());
        Some(name)
    }

    /// Resolves a type reference that names exactly one type, instantiating
    /// generics on the way. Silent: errors are reported by `resolve_tys`.
    fn concrete_ty(&mut self, t: &TypeRef, subst: &HashMap<String, Ty>) -> Option<Ty> {
        let TypeRef::Named { name, args, span } = t else {
            return None;
        };
        if args.is_empty() {
            if let Some(ty) = subst.get(name) {
                return Some(ty.clone());
            }
            if let Some(ty) = builtin_ty(name) {
                return Some(ty);
            }
        }
        match self.decls.get(name).copied()? {
            DeclRef::Class(d) if d.params.len() == args.len() => {
                let mut tys = Vec::with_capacity(args.len());
                for a in args {
                    tys.push(self.concrete_ty(a, subst)?);
                }
                self.instantiate(name, tys, span).map(Ty::Class)
            }
            DeclRef::DataType if args.is_empty() => Some(Ty::Data(name.clone())),
            DeclRef::Enum if args.is_empty() => Some(Ty::Enum(name.clone())),
            _ => None,
        }
    }

    fn collect(&mut self, t: &TypeRef, subst: &HashMap<String, Ty>) {
        match t {
            TypeRef::Named { args, .. } => {
                for a in args {
                    self.collect(a, subst);
                }
                self.concrete_ty(t, subst);
            }
            TypeRef::Wildcard {
                bound: Some((_, b)), ..
            } => self.collect(b, subst),
            TypeRef::Wildcard { bound: None, .. } => {}
        }
    }

    fn monomorphize(&mut self) {
        let mut names: Vec<(String, &'a ClassDecl)> = self
            .decls
            .iter()
            .filter_map(|(n, d)| match d {
                DeclRef::Class(c) if c.params.is_empty() => Some((n.clone(), *c)),
                _ => None,
            })
            .collect();
        names.sort_by(|a, b| a.0.cmp(&b.0));
        for (n, d) in names {
            self.instantiate(&n, Vec::new(), &d.span);
        }
        while let Some(name) = self.worklist.pop_front() {
            let (decl, subst) = {
                let m = &self.monos[&name];
                (m.decl, m.subst.clone())
            };
            for p in &decl.params {
                for b in &p.bounds {
                    self.collect(b, &subst);
                }
            }
            for t in &decl.extends {
                self.collect(t, &subst);
            }
            for f in &decl.features {
                self.collect(&f.ty, &subst);
            }
        }
    }

    // ---- types ----

    fn is_sub(&self, a: &str, b: &str) -> bool {
        a == b || self.classes.get(a).is_some_and(|c| c.ancestors.contains(b))
    }

    fn ty_sub(&self, a: &Ty, b: &Ty) -> bool {
        match (a, b) {
            (Ty::Class(x), Ty::Class(y)) => self.is_sub(x, y),
            (x, y) => x == y,
        }
    }

    /// Resolves a type reference to the union of types it denotes.
    fn resolve_tys(&mut self, t: &TypeRef, subst: &HashMap<String, Ty>) -> Option<BTreeSet<Ty>> {
        let (name, args, span) = match t {
            TypeRef::Named { name, args, span } => (name, args, span),
            TypeRef::Wildcard { span, .. } => {
                self.errors.push(err(
                    DiagnosticKind::TypeMismatch,
                    span,
                    "a wildcard is only allowed as a type argument",
                ));
                return None;
            }
        };
        if args.is_empty() {
            if let Some(ty) = subst.get(name) {
                return Some(BTreeSet::from([ty.clone()]));
            }
            if let Some(ty) = builtin_ty(name) {
                return Some(BTreeSet::from([ty]));
            }
        }
        let decl = match self.decls.get(name).copied() {
            Some(d) => d,
            None => {
                self.errors
                    .push(err(DiagnosticKind::UnknownName, span, format!("unknown type `{name}`")));
                return None;
            }
        };
        let d = match decl {
            DeclRef::Class(d) => d,
            DeclRef::DataType | DeclRef::Enum if !args.is_empty() => {
                self.errors.push(err(
                    DiagnosticKind::ArityMismatch,
                    span,
                    format!("`{name}` takes no type arguments"),
                ));
                return None;
            }
            DeclRef::DataType => return Some(BTreeSet::from([Ty::Data(name.clone())])),
            DeclRef::Enum => return Some(BTreeSet::from([Ty::Enum(name.clone())])),
        };
        if args.is_empty() {
            // A raw generic name stands for all of its instantiations.
            let all: BTreeSet<Ty> = self
                .monos
                .iter()
                .filter(|(_, m)| m.base == *name)
                .map(|(n, _)| Ty::Class(n.clone()))
                .collect();
            return Some(all);
        }
        if args.len() != d.params.len() {
            self.errors.push(err(
                DiagnosticKind::ArityMismatch,
                span,
                format!(
                    "`{name}` takes {} type argument(s), found {}",
                    d.params.len(),
                    args.len()
                ),
            ));
            return None;
        }
        // Each argument position is a predicate over instantiation arguments.
        type Pred = Box<dyn Fn(&Resolver, &Ty) -> bool>;
        let mut preds: Vec<Pred> = Vec::new();
        for a in args {
            match a {
                TypeRef::Wildcard { bound: None, .. } => preds.push(Box::new(|_, _| true)),
                TypeRef::Wildcard {
                    bound: Some((kind, b)), ..
                } => {
                    let bt = self.resolve_one(b, subst)?;
                    let kind = *kind;
                    preds.push(Box::new(move |r, x| match kind {
                        WildcardKind::Extends => r.ty_sub(x, &bt),
                        WildcardKind::Super => r.ty_sub(&bt, x),
                    }));
                }
                named => {
                    let at = self.resolve_one(named, subst)?;
                    preds.push(Box::new(move |_, x| *x == at));
                }
            }
        }
        let found: BTreeSet<Ty> = self
            .monos
            .iter()
            .filter(|(_, m)| m.base == *name && m.args.iter().zip(&preds).all(|(x, p)| p(self, x)))
            .map(|(n, _)| Ty::Class(n.clone()))
            .collect();
        Some(found)
    }

    fn resolve_one(&mut self, t: &TypeRef, subst: &HashMap<String, Ty>) -> Option<Ty> {
        let tys = self.resolve_tys(t, subst)?;
        let is_wild =
            matches!(t, TypeRef::Named { args, .. } if args.iter().any(|a| matches!(a, TypeRef::Wildcard { .. })));
        if tys.len() == 1 && !is_wild {
            return tys.into_iter().next();
        }
        if let TypeRef::Named { name, args, .. } = t {
            if args.is_empty() && tys.len() != 1 {
                self.errors.push(err(
                    DiagnosticKind::ArityMismatch,
                    t.span(),
                    format!("generic class `{name}` needs type arguments here"),
                ));
                return None;
            }
        }
        self.errors.push(err(
            DiagnosticKind::TypeMismatch,
            t.span(),
            format!("`{t}` must denote a single type here"),
        ));
        None
    }

    // ---- classes ----

    fn build_classes(&mut self) -> bool {
        let mut names: Vec<String> = self.monos.keys().cloned().collect();
        names.sort();
        let mut supers: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for n in &names {
            let (decl, subst, base, args, span) = {
                let m = &self.monos[n];
                (m.decl, m.subst.clone(), m.base.clone(), m.args.clone(), m.span.clone())
            };
            let mut sup = Vec::new();
            for t in &decl.extends {
                if let Some(ty) = self.resolve_one(t, &subst) {
                    match ty {
                        Ty::Class(c) if !sup.contains(&c) => sup.push(c),
                        Ty::Class(_) => {}
                        other => self.errors.push(err(
                            DiagnosticKind::TypeMismatch,
                            t.span(),
                            format!("a class cannot extend `{other}`"),
                        )),
                    }
                }
            }
            supers.insert(n.clone(), sup.clone());
            let span = if args.is_empty() { decl.span.clone() } else { span };
            self.classes.insert(
                n.clone(),
                ClassInfo {
                    name: n.clone(),
                    base,
                    args,
                    is_abstract: decl.is_abstract,
                    supers: sup,
                    ancestors: BTreeSet::new(),
                    span,
                },
            );
        }
        if !self.errors.is_empty() {
            return false;
        }
        // Cycle detection by depth-first search in name order.
        let mut state: HashMap<&str, u8> = HashMap::new();
        let mut reported = false;
        for start in &names {
            if reported {
                break;
            }
            let mut path: Vec<&str> = Vec::new();
            if let Some(cycle) = find_cycle(start, &supers, &mut state, &mut path) {
                let span = self.classes[&cycle[0]].span.clone();
                let mut listed = cycle.clone();
                listed.push(cycle[0].clone());
                self.errors.push(err(
                    DiagnosticKind::CyclicInheritance,
                    &span,
                    format!("cyclic inheritance: {}", listed.join(" -> ")),
                ));
                reported = true;
            }
        }
        if reported {
            return false;
        }
        for n in &names {
            let mut anc = BTreeSet::new();
            let mut stack = supers[n].clone();
            while let Some(s) = stack.pop() {
                if anc.insert(s.clone()) {
                    stack.extend(supers[&s].iter().cloned());
                }
            }
            self.classes[n].ancestors = anc;
        }
        // Parameter bounds, per instantiation.
        for n in &names {
            let (decl, subst, span) = {
                let m = &self.monos[n];
                (m.decl, m.subst.clone(), m.span.clone())
            };
            for p in &decl.params {
                let arg = subst[&p.name].clone();
                for b in &p.bounds {
                    if let Some(bt) = self.resolve_one(b, &subst) {
                        if !self.ty_sub(&arg, &bt) {
                            self.errors.push(err(
                                DiagnosticKind::UnsatisfiedParameterBound,
                                &span,
                                format!("`{arg}` does not satisfy `{} extends {bt}` in `{n}`", p.name),
                            ));
                        }
                    }
                }
            }
        }
        let order: Vec<String> = names;
        let mut sorted = IndexMap::new();
        for n in order {
            let c = self.classes.swap_remove(&n).unwrap();
            sorted.insert(n, c);
        }
        self.classes = sorted;
        self.errors.is_empty()
    }

    // ---- features ----

    fn build_features(&mut self) {
        let mut bases: Vec<(&'a ClassDecl, Vec<String>)> = Vec::new();
        let mut seen = BTreeSet::new();
        for m in self.monos.values() {
            if seen.insert(m.base.clone()) {
                let insts = self
                    .monos
                    .iter()
                    .filter(|(_, x)| x.base == m.base)
                    .map(|(n, _)| n.clone())
                    .collect();
                bases.push((m.decl, insts));
            }
        }
        bases.sort_by(|a, b| a.0.name.cmp(&b.0.name));
        let mut pending: Vec<(FeatureInfo, bool)> = Vec::new();
        for (decl, insts) in bases {
            let mut names_here: HashMap<&str, &SourceSpan> = HashMap::new();
            for f in &decl.features {
                if let Some(prev) = names_here.insert(&f.name, &f.span) {
                    let _ = prev;
                    self.errors.push(err(
                        DiagnosticKind::DuplicateFeature,
                        &f.span,
                        format!("feature `{}` is declared twice in `{}`", f.name, decl.name),
                    ));
                    continue;
                }
                if f.has_qualifier(Qualifier::Ghost) {
                    self.ghosts.insert(f.name.clone());
                    continue;
                }
                let mut owner_targets = Vec::new();
                let mut target = BTreeSet::new();
                let mut ok = true;
                for inst in &insts {
                    let subst = self.monos[inst].subst.clone();
                    match self.resolve_tys(&f.ty, &subst) {
                        Some(t) => {
                            target.extend(t.iter().cloned());
                            owner_targets.push((inst.clone(), t));
                        }
                        None => ok = false,
                    }
                }
                if !ok {
                    continue;
                }
                if f.kind == FeatureKind::Attribute && target.iter().any(Ty::is_class) {
                    self.errors.push(err(
                        DiagnosticKind::TypeMismatch,
                        f.ty.span(),
                        format!("attribute `{}` must have a datatype or enum type", f.name),
                    ));
                    continue;
                }
                if f.kind == FeatureKind::Property && target.iter().any(|t| !t.is_class()) {
                    self.errors.push(err(
                        DiagnosticKind::TypeMismatch,
                        f.ty.span(),
                        format!("property `{}` must have a class type", f.name),
                    ));
                    continue;
                }
                if target.contains(&Ty::Int) {
                    self.uses_int_atoms = true;
                }
                let nullable = f.has_qualifier(Qualifier::Nullable);
                if let Some((_, s)) = f.qualifiers.iter().find(|(q, _)| *q == Qualifier::Nullable) {
                    self.warnings.push(Diagnostic::warning(
                        DiagnosticKind::ExtraGrammatical,
                        Some(s.clone()),
                        "`nullable` is not part of the core grammar; read as a multiplicity lower bound of 0",
                    ));
                }
                if let Some((_, s)) = &f.cardinality {
                    self.warnings.push(Diagnostic::warning(
                        DiagnosticKind::ExtraGrammatical,
                        Some(s.clone()),
                        format!("cardinality on feature `{}` constrains its whole value set", f.name),
                    ));
                }
                let mut mult = f.mult.clone();
                if nullable {
                    mult.lower = 0;
                }
                pending.push((
                    FeatureInfo {
                        name: f.name.clone(),
                        declaring_class: decl.name.clone(),
                        kind: f.kind,
                        relation: Relation::binary(f.name.as_str()),
                        owners: insts.clone(),
                        target,
                        owner_targets,
                        mult,
                        cardinality: f.cardinality.clone(),
                        model: f.has_qualifier(Qualifier::Model),
                        nullable,
                        derived: f.flag(Flag::Derived).cloned(),
                        composes: f.flag(Flag::Composes).cloned(),
                        id: f.flag(Flag::Id).cloned(),
                        props: f.props.clone(),
                        span: f.span.clone(),
                    },
                    true,
                ));
            }
        }
        // Relation names: the feature name unless it clashes.
        let mut counts: HashMap<String, usize> = HashMap::new();
        for (f, _) in &pending {
            *counts.entry(f.name.clone()).or_default() += 1;
        }
        for (mut f, _) in pending {
            let clash = counts[&f.name] > 1
                || self.decls.contains_key(&f.name)
                || builtin_ty(&f.name).is_some()
                || f.name == "class";
            if clash {
                f.relation = Relation::binary(format!("{}.{}", f.declaring_class, f.name));
            }
            self.features.push(f);
        }
        // Inherited duplicates.
        let class_names: Vec<String> = self.classes.keys().cloned().collect();
        for c in class_names {
            let mut by_name: BTreeMap<&str, Vec<&FeatureInfo>> = BTreeMap::new();
            for f in &self.features {
                if f.owners.iter().any(|o| self.is_sub(&c, o)) {
                    by_name.entry(&f.name).or_default().push(f);
                }
            }
            for (name, fs) in by_name {
                if fs.len() > 1 {
                    let d = err(
                        DiagnosticKind::DuplicateFeature,
                        &fs[1].span,
                        format!(
                            "`{c}` inherits feature `{name}` from both `{}` and `{}`",
                            fs[0].declaring_class, fs[1].declaring_class
                        ),
                    );
                    if !self.errors.contains(&d) {
                        self.errors.push(d);
                    }
                }
            }
        }
    }

    fn cardinalities(&self) -> Vec<ClassCardinality> {
        let mut out = Vec::new();
        let mut seen = BTreeSet::new();
        for m in self.monos.values() {
            if !seen.insert(m.base.clone()) {
                continue;
            }
            let classes: Vec<String> = self
                .monos
                .iter()
                .filter(|(_, x)| x.base == m.base)
                .map(|(n, _)| n.clone())
                .collect();
            if let Some((k, s)) = &m.decl.cardinality {
                out.push(ClassCardinality {
                    base: m.base.clone(),
                    classes: classes.clone(),
                    kind: CardinalityKind::Keyword(*k),
                    span: s.clone(),
                });
            }
            if let Some(b) = &m.decl.bound {
                out.push(ClassCardinality {
                    base: m.base.clone(),
                    classes,
                    kind: CardinalityKind::Range(b.min, b.max),
                    span: b.span.clone(),
                });
            }
        }
        out.sort_by(|a, b| a.base.cmp(&b.base));
        out
    }

    // ---- invariants ----

    fn concrete_atoms(&self, class: &str) -> BTreeSet<Atomic> {
        self.classes
            .values()
            .filter(|c| !c.is_abstract && self.is_sub(&c.name, class))
            .map(|c| Atomic::Obj(c.name.clone()))
            .collect()
    }

    fn ty_atoms(&self, ty: &Ty) -> BTreeSet<Atomic> {
        match ty {
            Ty::Class(c) => self.concrete_atoms(c),
            other => BTreeSet::from([Atomic::Lit(other.clone())]),
        }
    }

    fn tys_atoms(&self, tys: &BTreeSet<Ty>) -> BTreeSet<Atomic> {
        tys.iter().flat_map(|t| self.ty_atoms(t)).collect()
    }

    fn all_atoms(&self) -> BTreeSet<Atomic> {
        let mut s: BTreeSet<Atomic> = self
            .classes
            .values()
            .filter(|c| !c.is_abstract)
            .map(|c| Atomic::Obj(c.name.clone()))
            .collect();
        s.insert(Atomic::ClassAtom);
        s.insert(Atomic::Lit(Ty::String));
        s.insert(Atomic::Lit(Ty::Int));
        for e in self.enums.keys() {
            s.insert(Atomic::Lit(Ty::Enum(e.clone())));
        }
        for d in &self.datatypes {
            s.insert(Atomic::Lit(Ty::Data(d.clone())));
        }
        s
    }

    fn build_invariants(&mut self) -> Vec<InvariantInfo> {
        let mut out = Vec::new();
        let ast = self.ast;
        fn walk<'b>(p: &'b Package, acc: &mut Vec<(Option<&'b ClassDecl>, &'b Invariant)>) {
            for i in &p.invariants {
                acc.push((None, i));
            }
            for c in &p.classifiers {
                if let Classifier::Class(d) = c {
                    for i in &d.invariants {
                        acc.push((Some(d), i));
                    }
                }
            }
            for q in &p.packages {
                walk(q, acc);
            }
        }
        let mut all = Vec::new();
        for p in &ast.packages {
            walk(p, &mut all);
        }
        all.sort_by(|a, b| a.0.map(|d| d.name.as_str()).cmp(&b.0.map(|d| d.name.as_str())));
        for (owner, inv) in all {
            let mut scope = Scope {
                vars: Vec::new(),
                owner: owner.map(|d| d.name.clone()),
            };
            if let Ok(formula) = self.formula(&inv.formula, &mut scope) {
                out.push(InvariantInfo {
                    name: inv.name.clone(),
                    owner: owner.map(|d| d.name.clone()),
                    formula,
                    span: inv.span.clone(),
                });
            }
        }
        out
    }

    fn mismatch<T>(&mut self, kind: DiagnosticKind, span: &Option<SourceSpan>, msg: String) -> Result<T, ()> {
        self.errors.push(Diagnostic::error(kind, span.clone(), msg));
        Err(())
    }

    fn formula(&mut self, f: &Formula, scope: &mut Scope) -> Result<Formula, ()> {
        let kind = match &f.kind {
            FormulaKind::Subset(a, b) | FormulaKind::Equal(a, b) => {
                let (x, tx) = self.expr(a, scope)?;
                let (y, ty) = self.expr(b, scope)?;
                if tx.len() != ty.len() {
                    return self.mismatch(
                        DiagnosticKind::ArityMismatch,
                        &f.span,
                        format!("cannot compare arity {} with arity {}", tx.len(), ty.len()),
                    );
                }
                if matches!(f.kind, FormulaKind::Subset(..)) {
                    FormulaKind::Subset(Box::new(x), Box::new(y))
                } else {
                    FormulaKind::Equal(Box::new(x), Box::new(y))
                }
            }
            FormulaKind::Mult(m, e) => FormulaKind::Mult(*m, Box::new(self.expr(e, scope)?.0)),
            FormulaKind::Not(g) => FormulaKind::Not(Box::new(self.formula(g, scope)?)),
            FormulaKind::And(a, b) => {
                let x = self.formula(a, scope);
                let y = self.formula(b, scope);
                FormulaKind::And(Box::new(x?), Box::new(y?))
            }
            FormulaKind::Or(a, b) => {
                let x = self.formula(a, scope);
                let y = self.formula(b, scope);
                FormulaKind::Or(Box::new(x?), Box::new(y?))
            }
            FormulaKind::Implies(a, b) => {
                let x = self.formula(a, scope);
                let y = self.formula(b, scope);
                FormulaKind::Implies(Box::new(x?), Box::new(y?))
            }
            FormulaKind::Forall(decls, body) | FormulaKind::Exists(decls, body) => {
                let mark = scope.vars.len();
                let ds = self.decls(decls, scope);
                let b = ds.and_then(|ds| self.formula(body, scope).map(|b| (ds, b)));
                scope.vars.truncate(mark);
                let (ds, b) = b?;
                if matches!(f.kind, FormulaKind::Forall(..)) {
                    FormulaKind::Forall(ds, Box::new(b))
                } else {
                    FormulaKind::Exists(ds, Box::new(b))
                }
            }
            FormulaKind::IntCompare(op, a, b) => {
                let x = self.int(a, scope);
                let y = self.int(b, scope);
                FormulaKind::IntCompare(*op, Box::new(x?), Box::new(y?))
            }
        };
        Ok(Formula {
            kind,
            span: f.span.clone(),
        })
    }

    fn decls(&mut self, decls: &[Decl], scope: &mut Scope) -> Result<Vec<Decl>, ()> {
        let mut out = Vec::with_capacity(decls.len());
        for d in decls {
            let (e, t) = self.expr(&d.expr, scope)?;
            if t.len() != 1 {
                return self.mismatch(
                    DiagnosticKind::ArityMismatch,
                    &d.expr.span,
                    format!("variable `{}` must range over a set, found arity {}", d.var, t.len()),
                );
            }
            scope.vars.push((d.var.clone(), t[0].clone()));
            out.push(Decl {
                var: d.var.clone(),
                expr: e,
            });
        }
        Ok(out)
    }

    fn int(&mut self, i: &IntExpr, scope: &mut Scope) -> Result<IntExpr, ()> {
        let kind = match &i.kind {
            IntExprKind::Literal(v) => {
                self.int_literals.insert(*v);
                IntExprKind::Literal(*v)
            }
            IntExprKind::Card(e) => IntExprKind::Card(Box::new(self.expr(e, scope)?.0)),
            IntExprKind::Sum(e) => {
                let (x, t) = self.expr(e, scope)?;
                if t.len() != 1 {
                    return self.mismatch(
                        DiagnosticKind::ArityMismatch,
                        &e.span,
                        format!("sum needs a set of integers, found arity {}", t.len()),
                    );
                }
                if t[0].iter().any(|a| *a != Atomic::Lit(Ty::Int)) {
                    return self.mismatch(
                        DiagnosticKind::TypeMismatch,
                        &e.span,
                        "sum needs a set of integers".to_string(),
                    );
                }
                self.uses_int_atoms = true;
                IntExprKind::Sum(Box::new(x))
            }
            IntExprKind::Arith(op, a, b) => {
                let x = self.int(a, scope);
                let y = self.int(b, scope);
                IntExprKind::Arith(*op, Box::new(x?), Box::new(y?))
            }
        };
        Ok(IntExpr {
            kind,
            span: i.span.clone(),
        })
    }

    fn name(&mut self, name: &str, span: &Option<SourceSpan>, scope: &Scope) -> Result<(Expr, Cols), ()> {
        let sp = span.clone();
        let rel = |r: &Relation| Expr::rel(r).with_span(sp.clone());
        if let Some((_, t)) = scope.vars.iter().rev().find(|(v, _)| v.name() == name) {
            return Ok((Expr::var(name).with_span(sp), vec![t.clone()]));
        }
        if name == "class" {
            let objs = self.all_objects();
            return Ok((rel(&class_builtin()), vec![objs, BTreeSet::from([Atomic::ClassAtom])]));
        }
        if let Some(c) = self.classes.get(name) {
            let atoms = self.concrete_atoms(&c.name);
            return Ok((rel(&class_relation(name)), vec![atoms]));
        }
        if let Some(DeclRef::Class(d)) = self.decls.get(name).copied() {
            if !d.params.is_empty() {
                let insts: Vec<String> = self
                    .monos
                    .iter()
                    .filter(|(_, m)| m.base == name)
                    .map(|(n, _)| n.clone())
                    .collect();
                let mut atoms = BTreeSet::new();
                for i in &insts {
                    atoms.extend(self.concrete_atoms(i));
                }
                let e = Expr::union_all(insts.iter().map(|i| rel(&class_relation(i))));
                return match e {
                    Some(e) => Ok((e.with_span(sp), vec![atoms])),
                    None => self.mismatch(
                        DiagnosticKind::UnknownName,
                        span,
                        format!("generic class `{name}` is never instantiated"),
                    ),
                };
            }
        }
        if let Some(owner) = &scope.owner {
            let params: Vec<(String, Vec<Ty>)> = self
                .monos
                .values()
                .filter(|m| &m.base == owner)
                .flat_map(|m| m.subst.iter().map(|(p, t)| (p.clone(), vec![t.clone()])))
                .collect();
            let tys: BTreeSet<Ty> = params
                .into_iter()
                .filter(|(p, _)| p == name)
                .flat_map(|(_, t)| t)
                .collect();
            if !tys.is_empty() {
                let atoms = self.tys_atoms(&tys);
                let e = Expr::union_all(tys.iter().map(|t| rel(&pool_relation(t)))).unwrap();
                return Ok((e.with_span(sp), vec![atoms]));
            }
            let visible: Vec<usize> = self
                .features
                .iter()
                .enumerate()
                .filter(|(_, f)| {
                    f.name == name
                        && self
                            .monos
                            .iter()
                            .filter(|(_, m)| &m.base == owner)
                            .any(|(n, _)| f.owners.iter().any(|o| self.is_sub(n, o)))
                })
                .map(|(i, _)| i)
                .collect();
            if !visible.is_empty() {
                return Ok(self.feature_union(&visible, &sp));
            }
        }
        let matching: Vec<usize> = self
            .features
            .iter()
            .enumerate()
            .filter(|(_, f)| f.name == name)
            .map(|(i, _)| i)
            .collect();
        if !matching.is_empty() {
            return Ok(self.feature_union(&matching, &sp));
        }
        if self.ghosts.contains(name) {
            return self.mismatch(
                DiagnosticKind::GhostReference,
                span,
                format!("`{name}` is a ghost feature and cannot be used in reasoning"),
            );
        }
        if let Some((e, lit)) = name.split_once("::") {
            if self.enums.get(e).is_some_and(|ls| ls.iter().any(|l| l == lit)) {
                let t = BTreeSet::from([Atomic::Lit(Ty::Enum(e.to_string()))]);
                return Ok((rel(&enum_literal_relation(e, lit)), vec![t]));
            }
            return self.mismatch(
                DiagnosticKind::UnknownName,
                span,
                format!("unknown enum literal `{name}`"),
            );
        }
        let pool = builtin_ty(name).or_else(|| match self.decls.get(name) {
            Some(DeclRef::Enum) => Some(Ty::Enum(name.to_string())),
            Some(DeclRef::DataType) => Some(Ty::Data(name.to_string())),
            _ => None,
        });
        if let Some(ty) = pool {
            if ty == Ty::Int {
                self.uses_int_atoms = true;
            }
            let atoms = self.ty_atoms(&ty);
            return Ok((rel(&pool_relation(&ty)), vec![atoms]));
        }
        self.mismatch(DiagnosticKind::UnknownName, span, format!("unknown name `{name}`"))
    }

    fn all_objects(&self) -> BTreeSet<Atomic> {
        self.classes
            .values()
            .filter(|c| !c.is_abstract)
            .map(|c| Atomic::Obj(c.name.clone()))
            .collect()
    }

    fn feature_union(&self, idxs: &[usize], sp: &Option<SourceSpan>) -> (Expr, Cols) {
        let mut dom = BTreeSet::new();
        let mut rng = BTreeSet::new();
        let mut rels = Vec::new();
        for &i in idxs {
            let f = &self.features[i];
            for o in &f.owners {
                dom.extend(self.concrete_atoms(o));
            }
            rng.extend(self.tys_atoms(&f.target));
            if !rels.contains(&f.relation) {
                rels.push(f.relation.clone());
            }
        }
        let e = Expr::union_all(rels.iter().map(|r| Expr::rel(r).with_span(sp.clone()))).unwrap();
        (e.with_span(sp.clone()), vec![dom, rng])
    }

    fn expr(&mut self, e: &Expr, scope: &mut Scope) -> Result<(Expr, Cols), ()> {
        let span = e.span.clone();
        let same = |x: &Cols, y: &Cols| x.len() == y.len();
        let (kind, cols): (ExprKind, Cols) = match &e.kind {
            ExprKind::Var(v) => return self.name(v.name(), &span, scope),
            ExprKind::Rel(r) => {
                // String literals arrive as builtin relations named by their quoted text.
                let text = r.name().trim_matches('"').to_string();
                self.strings.insert(text);
                (
                    ExprKind::Rel(r.clone()),
                    vec![BTreeSet::from([Atomic::Lit(Ty::String)])],
                )
            }
            ExprKind::Univ => (ExprKind::Univ, vec![self.all_atoms()]),
            ExprKind::Transpose(a) | ExprKind::Closure(a) => {
                let (x, t) = self.expr(a, scope)?;
                if t.len() != 2 {
                    let op = if matches!(e.kind, ExprKind::Closure(_)) {
                        "closure"
                    } else {
                        "transpose"
                    };
                    return self.mismatch(
                        DiagnosticKind::ArityMismatch,
                        &span,
                        format!("{op} needs a binary relation, found arity {}", t.len()),
                    );
                }
                if matches!(e.kind, ExprKind::Closure(_)) {
                    (ExprKind::Closure(Box::new(x)), t)
                } else {
                    (ExprKind::Transpose(Box::new(x)), vec![t[1].clone(), t[0].clone()])
                }
            }
            ExprKind::Union(a, b) | ExprKind::Intersection(a, b) | ExprKind::Difference(a, b) => {
                let l = self.expr(a, scope);
                let r = self.expr(b, scope);
                let ((x, tx), (y, ty)) = (l?, r?);
                if !same(&tx, &ty) {
                    return self.mismatch(
                        DiagnosticKind::ArityMismatch,
                        &span,
                        format!("operands have arity {} and {}", tx.len(), ty.len()),
                    );
                }
                let (bx, by) = (Box::new(x), Box::new(y));
                match &e.kind {
                    ExprKind::Union(..) => {
                        let t = tx.iter().zip(&ty).map(|(p, q)| p.union(q).cloned().collect()).collect();
                        (ExprKind::Union(bx, by), t)
                    }
                    ExprKind::Intersection(..) => {
                        let t = tx
                            .iter()
                            .zip(&ty)
                            .map(|(p, q)| p.intersection(q).cloned().collect())
                            .collect();
                        (ExprKind::Intersection(bx, by), t)
                    }
                    _ => (ExprKind::Difference(bx, by), tx),
                }
            }
            ExprKind::Join(a, b) => {
                let l = self.expr(a, scope);
                let r = self.expr(b, scope);
                let ((x, tx), (y, ty)) = (l?, r?);
                if tx.len() + ty.len() < 3 {
                    return self.mismatch(
                        DiagnosticKind::ArityMismatch,
                        &span,
                        format!("cannot join arity {} with arity {}", tx.len(), ty.len()),
                    );
                }
                let (last, first) = (&tx[tx.len() - 1], &ty[0]);
                if !last.is_empty() && !first.is_empty() && last.is_disjoint(first) {
                    let left = describe(last);
                    let right = describe(first);
                    return self.mismatch(
                        DiagnosticKind::TypeMismatch,
                        &b.span,
                        format!("cannot join: the left side yields {left} but this applies to {right}"),
                    );
                }
                let mut t: Cols = tx[..tx.len() - 1].to_vec();
                t.extend(ty[1..].iter().cloned());
                (ExprKind::Join(Box::new(x), Box::new(y)), t)
            }
            ExprKind::Product(a, b) => {
                let l = self.expr(a, scope);
                let r = self.expr(b, scope);
                let ((x, mut tx), (y, ty)) = (l?, r?);
                tx.extend(ty);
                (ExprKind::Product(Box::new(x), Box::new(y)), tx)
            }
            ExprKind::IfThenElse(c, a, b) => {
                let cond = self.formula(c, scope);
                let l = self.expr(a, scope);
                let r = self.expr(b, scope);
                let (cond, (x, tx), (y, ty)) = (cond?, l?, r?);
                if !same(&tx, &ty) {
                    return self.mismatch(
                        DiagnosticKind::ArityMismatch,
                        &span,
                        format!("branches have arity {} and {}", tx.len(), ty.len()),
                    );
                }
                let t = tx.iter().zip(&ty).map(|(p, q)| p.union(q).cloned().collect()).collect();
                (ExprKind::IfThenElse(Box::new(cond), Box::new(x), Box::new(y)), t)
            }
            ExprKind::Comprehension(decls, body) => {
                let mark = scope.vars.len();
                let ds = self.decls(decls, scope);
                let r = ds.and_then(|ds| self.formula(body, scope).map(|b| (ds, b)));
                let t: Cols = scope.vars[mark..].iter().map(|(_, t)| t.clone()).collect();
                scope.vars.truncate(mark);
                let (ds, b) = r?;
                (ExprKind::Comprehension(ds, Box::new(b)), t)
            }
            ExprKind::Project(a, cols) => {
                let (x, tx) = self.expr(a, scope)?;
                let mut t = Vec::new();
                let mut ints = Vec::new();
                for c in cols {
                    let ci = self.int(c, scope)?;
                    match ci.constant() {
                        Some(k) if k >= 0 && (k as usize) < tx.len() => t.push(tx[k as usize].clone()),
                        Some(k) => {
                            return self.mismatch(
                                DiagnosticKind::TypeMismatch,
                                &c.span,
                                format!("column {k} is out of range for arity {}", tx.len()),
                            )
                        }
                        None => {
                            return self.mismatch(
                                DiagnosticKind::TypeMismatch,
                                &c.span,
                                "projection columns must be constants".to_string(),
                            )
                        }
                    }
                    ints.push(ci);
                }
                if t.is_empty() {
                    return self.mismatch(
                        DiagnosticKind::ArityMismatch,
                        &span,
                        "projection needs at least one column".to_string(),
                    );
                }
                (ExprKind::Project(Box::new(x), ints), t)
            }
            ExprKind::IntCast(i) => {
                self.uses_int_atoms = true;
                let x = self.int(i, scope)?;
                (
                    ExprKind::IntCast(Box::new(x)),
                    vec![BTreeSet::from([Atomic::Lit(Ty::Int)])],
                )
            }
        };
        Ok((Expr { kind, span }, cols))
    }
}

struct Scope {
    vars: Vec<(Variable, BTreeSet<Atomic>)>,
    owner: Option<String>,
}

fn describe(s: &BTreeSet<Atomic>) -> String {
    let names: Vec<String> = s
        .iter()
        .map(|a| match a {
            Atomic::Obj(c) => c.clone(),
            Atomic::Lit(t) => t.to_string(),
            Atomic::ClassAtom => "class".to_string(),
        })
        .collect();
    format!("{{{}}}", names.join(", "))
}

fn find_cycle<'s>(
    node: &'s str,
    supers: &'s BTreeMap<String, Vec<String>>,
    state: &mut HashMap<&'s str, u8>,
    path: &mut Vec<&'s str>,
) -> Option<Vec<String>> {
    match state.get(node) {
        Some(2) => return None,
        Some(1) => {
            let pos = path.iter().position(|p| *p == node).unwrap();
            return Some(path[pos..].iter().map(|s| s.to_string()).collect());
        }
        _ => {}
    }
    state.insert(node, 1);
    path.push(node);
    for s in &supers[node] {
        if let Some(c) = find_cycle(s, supers, state, path) {
            return Some(c);
        }
    }
    path.pop();
    state.insert(node, 2);
    None
}

/// Resolves names, expands generics and type-checks invariants.
pub fn resolve_and_typecheck(ast: &MetamodelAst) -> Result<ResolvedMetamodel, Diagnostics> {
    let mut r = Resolver::new(ast);
    r.declare();
    r.monomorphize();
    if !r.errors.is_empty() || !r.build_classes() {
        return Err(Diagnostics(r.errors));
    }
    r.build_features();
    let invariants = r.build_invariants();
    if !r.errors.is_empty() {
        return Err(Diagnostics(r.errors));
    }
    let cardinalities = r.cardinalities();
    let mut generics: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (n, m) in &r.monos {
        if !m.args.is_empty() {
            generics.entry(m.base.clone()).or_default().push(n.clone());
        }
    }
    for v in generics.values_mut() {
        v.sort();
    }
    Ok(ResolvedMetamodel {
        file: ast.file.clone(),
        package: ast.packages.first().map(|p| p.name.clone()).unwrap_or_default(),
        classes: r.classes,
        cardinalities,
        features: r.features,
        invariants,
        enums: r.enums,
        datatypes: r.datatypes,
        strings: r.strings,
        int_literals: r.int_literals,
        uses_int_atoms: r.uses_int_atoms,
        generics,
        warnings: r.warnings,
    })
}

/// Parses and resolves in one step.
pub fn load_metamodel(text: &str, file: &str) -> Result<ResolvedMetamodel, Diagnostics> {
    let ast = super::parse(text, file)?;
    resolve_and_typecheck(&ast)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(src: &str) -> Result<ResolvedMetamodel, Diagnostics> {
        load_metamodel(src, "t.aie")
    }

    #[test]
    fn cycle_is_reported() {
        let e = load("package p { class A extends B { } class B extends A { } }").unwrap_err();
        assert_eq!(e.kinds(), vec![DiagnosticKind::CyclicInheritance]);
        assert!(e.0[0].message.contains("A -> B -> A"), "{}", e.0[0].message);
    }

    #[test]
    fn join_type_mismatch_at_second_step() {
        let src = "package p {
  abstract class Vehicle { }
  class Car extends Vehicle { }
  class List { property car : Vehicle [?]; }
  invariant: all x: List | some x.car.car;
}";
        let e = load(src).unwrap_err();
        assert_eq!(e.kinds(), vec![DiagnosticKind::TypeMismatch]);
        let span = e.0[0].span.clone().unwrap();
        assert_eq!((span.line, span.column, span.length), (5, 39, 3));
    }

    #[test]
    fn generics_and_wildcards() {
        let src = "package p {
  abstract class V { }
  class A extends V { }
  class B extends V { }
  class C { }
  abstract class L<T extends V> { property head : T [?]; property next : L<T> [?]; }
  class LA extends L<A> { }
  class LB extends L<B> { }
  class M { property all_lists : L<? extends V> [*]; property raw : L [*]; }
}";
        let mm = load(src).unwrap();
        assert!(mm.classes.contains_key("L<A>"));
        assert!(mm.classes.contains_key("L<B>"));
        let lists = &mm.features.iter().find(|f| f.name == "all_lists").unwrap().target;
        assert_eq!(lists.len(), 2);
        let raw = &mm.features.iter().find(|f| f.name == "raw").unwrap().target;
        assert_eq!(raw, lists);
        let head = mm.features.iter().find(|f| f.name == "head").unwrap();
        assert_eq!(head.owners, vec!["L<A>".to_string(), "L<B>".to_string()]);
        assert_eq!(head.target.len(), 2);
        assert!(mm.class("LA").unwrap().ancestors.contains("L<A>"));
    }

    #[test]
    fn parameter_bound_checked() {
        let src = "package p {
  class V { }
  class X { }
  abstract class L<T extends V> { }
  class LX extends L<X> { }
}";
        let e = load(src).unwrap_err();
        assert_eq!(e.kinds(), vec![DiagnosticKind::UnsatisfiedParameterBound]);
    }

    #[test]
    fn duplicate_and_ghost() {
        let e = load("package p { class A { property x : A [?]; property x : A [*]; } }").unwrap_err();
        assert_eq!(e.kinds(), vec![DiagnosticKind::DuplicateFeature]);
        let e = load("package p { class A { ghost property g : A [?]; } invariant: some A.g; }").unwrap_err();
        assert_eq!(e.kinds(), vec![DiagnosticKind::GhostReference]);
    }

    #[test]
    fn declaration_order_does_not_matter() {
        let a = load("package p { class A { property r : B [?]; } class B { } invariant: some A.r; }").unwrap();
        let b = load("package p { invariant: some A.r; class B { } class A { property r : B [?]; } }").unwrap();
        assert_eq!(
            a.classes.keys().collect::<Vec<_>>(),
            b.classes.keys().collect::<Vec<_>>()
        );
        assert_eq!(a.invariants[0].formula, b.invariants[0].formula);
    }
}
