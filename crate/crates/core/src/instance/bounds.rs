use std::collections::{BTreeMap, BTreeSet, HashSet};

use super::{LinkTarget, PartialInstance};
use crate::frontend::{
    class_atom, class_builtin, enum_literal_relation, string_atom, string_relation, CardinalityKind, Diagnostic,
    DiagnosticKind, Diagnostics, ResolvedMetamodel, Ty,
};
use crate::kernel::{
    int_range, Category, ConstraintId, Expr, IntExpr, Multiplicity, Relation, RelationKind, RelationalProblem, Tuple,
    TupleSet, Universe,
};

pub const DEFAULT_SCOPE: u32 = 3;

/// How many atoms each concrete class may use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScopeConfig {
    /// Total objects per concrete class, asserted ones included.
    pub default_scope: u32,
    pub per_class: BTreeMap<String, u32>,
    pub bitwidth: u32,
    /// Put asserted links in lower bounds instead of selector-guarded facts.
    pub hard_facts: bool,
}

impl Default for ScopeConfig {
    fn default() -> Self {
        ScopeConfig {
            default_scope: DEFAULT_SCOPE,
            per_class: BTreeMap::new(),
            bitwidth: 8,
            hard_facts: false,
        }
    }
}

/// Which instance declaration a fact constraint came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactRef {
    Object(usize),
    Link(usize),
}

/// A problem extended with instance facts, and its bounds.
#[derive(Clone, Debug)]
pub struct BoundProblem {
    pub problem: RelationalProblem,
    pub bounds: crate::kernel::Bounds,
    pub facts: Vec<(ConstraintId, FactRef)>,
    /// Effective scope per concrete class.
    pub scopes: BTreeMap<String, u32>,
    pub bitwidth: u32,
}

fn diag(kind: DiagnosticKind, span: Option<crate::SourceSpan>, msg: String) -> Diagnostic {
    Diagnostic::error(kind, span, msg)
}

fn scopes(
    mm: &ResolvedMetamodel,
    inst: &PartialInstance,
    cfg: &ScopeConfig,
) -> Result<BTreeMap<String, u32>, Vec<Diagnostic>> {
    let mut errors = Vec::new();
    for name in cfg.per_class.keys() {
        let concrete = mm.class(name).is_some_and(|c| !c.is_abstract);
        if !concrete && !mm.datatypes.contains(name) {
            errors.push(diag(
                DiagnosticKind::UnknownClass,
                None,
                format!("scope given for `{name}`, which is not a concrete class or datatype"),
            ));
        }
    }
    let mut out = BTreeMap::new();
    for c in mm.concrete_classes() {
        let asserted = inst.objects.iter().filter(|o| o.class == c).count() as u32;
        let explicit = cfg.per_class.get(c).copied();
        if let Some(n) = explicit {
            if n < asserted {
                errors.push(diag(
                    DiagnosticKind::ScopeBelowAssertion,
                    None,
                    format!("scope {n} for `{c}` is below its {asserted} asserted objects"),
                ));
            }
        }
        let mut scope = explicit.unwrap_or(cfg.default_scope).max(asserted);
        let mut cap: Option<u32> = None;
        for card in &mm.cardinalities {
            if card.classes.len() == 1 && card.classes[0] == c {
                let lower = match card.kind {
                    CardinalityKind::Keyword(Multiplicity::One | Multiplicity::Some) => 1,
                    CardinalityKind::Range(m, _) => m,
                    CardinalityKind::Keyword(_) => 0,
                };
                scope = scope.max(lower);
            }
            if !card.classes.iter().any(|k| mm.is_subclass(c, k)) {
                continue;
            }
            let limit = match card.kind {
                CardinalityKind::Keyword(Multiplicity::One | Multiplicity::Lone) => 1,
                CardinalityKind::Range(_, n) => n,
                CardinalityKind::Keyword(_) => continue,
            };
            let covered = inst
                .objects
                .iter()
                .filter(|o| card.classes.iter().any(|k| mm.is_subclass(&o.class, k)))
                .count() as u32;
            if covered > limit {
                let d = diag(
                    DiagnosticKind::CardinalityScopeConflict,
                    Some(card.span.clone()),
                    format!(
                        "{covered} asserted objects exceed the declared maximum of {limit} for `{}`",
                        card.base
                    ),
                );
                if !errors.contains(&d) {
                    errors.push(d);
                }
            }
            cap = Some(cap.map_or(limit, |x: u32| x.min(limit)));
        }
        if let Some(cap) = cap {
            scope = scope.min(cap).max(asserted);
        }
        out.insert(c.to_string(), scope);
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(errors)
    }
}

/// Literal types whose atoms the problem or instance needs.
fn literal_types(problem: &RelationalProblem, mm: &ResolvedMetamodel, inst: &PartialInstance) -> BTreeSet<Ty> {
    let mut tys: BTreeSet<Ty> = mm
        .features
        .iter()
        .flat_map(|f| f.target.iter().filter(|t| !t.is_class()).cloned())
        .collect();
    for r in &problem.relations {
        if r.kind() != RelationKind::Builtin {
            continue;
        }
        let name = r.name();
        if let Some((e, _)) = name.split_once("::") {
            tys.insert(Ty::Enum(e.to_string()));
        } else if name == "String" {
            tys.insert(Ty::String);
        } else if name == "Int" {
            tys.insert(Ty::Int);
        } else if mm.enums.contains_key(name) {
            tys.insert(Ty::Enum(name.to_string()));
        } else if mm.datatypes.iter().any(|d| d == name) {
            tys.insert(Ty::Data(name.to_string()));
        }
    }
    if mm.uses_int_atoms || inst.links.iter().any(|l| matches!(l.target, LinkTarget::Int(_))) {
        tys.insert(Ty::Int);
    }
    tys
}

/// Builds the universe and bounds for `problem` with the partial instance
/// `inst`, and adds one fact constraint per asserted object and link.
pub fn build_bounds(
    problem: &RelationalProblem,
    mm: &ResolvedMetamodel,
    inst: &PartialInstance,
    cfg: &ScopeConfig,
) -> Result<BoundProblem, Diagnostics> {
    let scopes = scopes(mm, inst, cfg).map_err(Diagnostics)?;
    let (lo, hi) = int_range(cfg.bitwidth);
    let mut int_errors = Vec::new();
    for l in &inst.links {
        if let LinkTarget::Int(v) = l.target {
            if v < lo || v > hi {
                int_errors.push(diag(
                    DiagnosticKind::TypeMismatch,
                    Some(l.span.clone()),
                    format!("{v} does not fit in {} bits", cfg.bitwidth),
                ));
            }
        }
    }
    if !int_errors.is_empty() {
        return Err(Diagnostics(int_errors));
    }

    // Atoms, with the class each object atom belongs to exactly.
    let mut atoms: Vec<String> = Vec::new();
    let mut object_class: Vec<(String, String)> = Vec::new();
    let mut used: HashSet<String> = HashSet::new();
    for o in &inst.objects {
        atoms.push(o.name.clone());
        used.insert(o.name.clone());
        object_class.push((o.name.clone(), o.class.clone()));
    }
    for (c, &scope) in &scopes {
        let asserted = inst.objects.iter().filter(|o| &o.class == c).count() as u32;
        let mut k = asserted;
        for _ in asserted..scope {
            while used.contains(&format!("{c}${k}")) {
                k += 1;
            }
            let name = format!("{c}${k}");
            used.insert(name.clone());
            atoms.push(name.clone());
            object_class.push((name, c.clone()));
            k += 1;
        }
    }
    for c in scopes.keys() {
        atoms.push(class_atom(c));
    }
    let tys = literal_types(problem, mm, inst);
    let mut strings: BTreeSet<String> = mm.strings.clone();
    for l in &inst.links {
        if let LinkTarget::Str(s) = &l.target {
            strings.insert(s.clone());
        }
    }
    let string_atoms: Vec<String> = strings.iter().map(|s| string_atom(s)).collect();
    atoms.extend(string_atoms.iter().cloned());
    let mut pools: BTreeMap<Ty, Vec<String>> = BTreeMap::new();
    pools.insert(Ty::String, string_atoms);
    for t in &tys {
        match t {
            Ty::Enum(e) => {
                let lits: Vec<String> = mm.enums[e].iter().map(|l| crate::frontend::enum_atom(e, l)).collect();
                atoms.extend(lits.iter().cloned());
                pools.insert(t.clone(), lits);
            }
            Ty::Data(d) => {
                let n = cfg.per_class.get(d).copied().unwrap_or(cfg.default_scope);
                let vals: Vec<String> = (0..n).map(|k| format!("{d}${k}")).collect();
                atoms.extend(vals.iter().cloned());
                pools.insert(t.clone(), vals);
            }
            _ => {}
        }
    }
    let mut ints = Vec::new();
    if tys.contains(&Ty::Int) {
        for v in lo..=hi {
            ints.push((v, atoms.len()));
            atoms.push(v.to_string());
        }
        pools.insert(Ty::Int, ints.iter().map(|(v, _)| v.to_string()).collect());
    }
    if atoms.is_empty() {
        atoms.push("univ$0".to_string());
    }
    let universe = Universe::new(atoms.iter().map(String::as_str))
        .map_err(|e| Diagnostics(vec![diag(DiagnosticKind::DuplicateName, None, e.to_string())]))?;

    // Facts.
    let mut problem = problem.clone();
    let mut facts = Vec::new();
    let constant = |name: &str| Relation::new(name, 1, RelationKind::Builtin);
    for (i, o) in inst.objects.iter().enumerate() {
        let rel = constant(&o.name);
        problem.declare(rel.clone());
        let f = Expr::rel(&rel).in_(Expr::rel(&crate::frontend::class_relation(&o.class)));
        let id = problem.add(
            format!("object {} : {}", o.name, o.class),
            f,
            Some(o.span.clone()),
            Category::Fact,
        );
        facts.push((id, FactRef::Object(i)));
    }
    if !cfg.hard_facts {
        for (i, l) in inst.links.iter().enumerate() {
            let target = match &l.target {
                LinkTarget::Object(o) => Expr::rel(&constant(o)),
                LinkTarget::Str(s) => {
                    problem.declare(string_relation(s));
                    Expr::rel(&string_relation(s))
                }
                LinkTarget::Enum(e, lit) => {
                    problem.declare(enum_literal_relation(e, lit));
                    Expr::rel(&enum_literal_relation(e, lit))
                }
                LinkTarget::Int(v) => Expr::int_cast(IntExpr::literal(*v)),
            };
            let f = Expr::rel(&constant(&l.source))
                .product(target)
                .in_(Expr::rel(&l.relation));
            let id = problem.add(l.to_string(), f, Some(l.span.clone()), Category::Fact);
            facts.push((id, FactRef::Link(i)));
        }
    }

    // Bounds.
    let u = &universe;
    let ord = |a: &str| u.index_of(a).expect("atom is in the universe");
    let atoms_below = |class: &str, asserted_only: bool| -> Vec<usize> {
        object_class
            .iter()
            .filter(|(o, c)| mm.is_subclass(c, class) && (!asserted_only || inst.object(o).is_some()))
            .map(|(o, _)| ord(o))
            .collect()
    };
    let set1 = |ords: Vec<usize>| TupleSet::from_tuples(u, 1, ords.into_iter().map(|o| vec![o])).unwrap();
    let ty_atoms = |t: &Ty| -> Vec<usize> {
        match t {
            Ty::Class(c) => atoms_below(c, false),
            other => pools
                .get(other)
                .map(|v| v.iter().map(|a| ord(a)).collect())
                .unwrap_or_default(),
        }
    };
    let mut bounds = crate::kernel::Bounds::new(universe.clone());
    for (v, o) in &ints {
        bounds.bind_int(*v, *o).unwrap();
    }
    let class_rel = class_builtin();
    for r in &problem.relations {
        let name = r.name();
        let (lower, upper) = if r.kind() == RelationKind::Class {
            (set1(atoms_below(name, true)), set1(atoms_below(name, false)))
        } else if *r == class_rel {
            let pairs = |asserted_only: bool| -> Vec<Tuple> {
                object_class
                    .iter()
                    .filter(|(o, _)| !asserted_only || inst.object(o).is_some())
                    .map(|(o, c)| vec![ord(o), ord(&class_atom(c))])
                    .collect()
            };
            (
                TupleSet::from_tuples(u, 2, pairs(true)).unwrap(),
                TupleSet::from_tuples(u, 2, pairs(false)).unwrap(),
            )
        } else if let Some(f) = mm.feature_by_relation(name) {
            let mut upper = TupleSet::empty(u, 2);
            for (owner, targets) in &f.owner_targets {
                let targets: Vec<usize> = targets.iter().flat_map(&ty_atoms).collect();
                for s in atoms_below(owner, false) {
                    for &t in &targets {
                        upper.insert(vec![s, t]).unwrap();
                    }
                }
            }
            let mut lower = TupleSet::empty(u, 2);
            if cfg.hard_facts {
                for l in inst.links.iter().filter(|l| l.relation == *r) {
                    lower.insert(vec![ord(&l.source), ord(&l.target.atom())]).unwrap();
                }
            }
            (lower, upper)
        } else {
            let exact = if let Some(c) = name.strip_prefix('@') {
                set1(vec![ord(&class_atom(c))])
            } else if name == "String" {
                set1(ty_atoms(&Ty::String))
            } else if name == "Int" {
                set1(ty_atoms(&Ty::Int))
            } else if mm.enums.contains_key(name) {
                set1(ty_atoms(&Ty::Enum(name.to_string())))
            } else if mm.datatypes.iter().any(|d| d == name) {
                set1(ty_atoms(&Ty::Data(name.to_string())))
            } else if let Some(o) = u.index_of(name) {
                // Object constants, string literals and enum literals are named by their atom.
                set1(vec![o])
            } else {
                debug_assert!(false, "relation `{name}` has no bound");
                TupleSet::empty(u, r.arity())
            };
            (exact.clone(), exact)
        };
        bounds
            .bound(r, lower, upper)
            .expect("lower bounds are drawn from upper bounds");
    }
    Ok(BoundProblem {
        problem,
        bounds,
        facts,
        scopes,
        bitwidth: cfg.bitwidth,
    })
}
