//! Lowers a resolved metamodel into a relational problem.

use thiserror::Error;

use crate::frontend::{
    class_atom_relation, class_builtin, class_relation, CardinalityKind, FeatureInfo, MultSpec, Prop, ResolvedMetamodel,
};
use crate::kernel::{
    visit_relations, Category, Decl, Expr, Formula, IntExpr, Multiplicity, Relation, RelationalProblem,
};
use crate::span::SourceSpan;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("qualifier `{keyword}` needs a binary relation, but `{relation}` has arity {arity}")]
    NonBinaryQualifier {
        keyword: &'static str,
        relation: String,
        arity: usize,
    },
}

fn var(name: &str) -> Expr {
    Expr::var(name)
}

fn all1(v: &str, d: &Expr, body: Formula) -> Formula {
    Formula::forall(vec![Decl::new(v, d.clone())], body)
}

fn all2(d: &Expr, body: Formula) -> Formula {
    Formula::forall(vec![Decl::new("x", d.clone()), Decl::new("y", d.clone())], body)
}

/// The formula a props keyword stands for, over relation `r` with domain
/// `d` and range `range`.
pub fn expand_qualifier(keyword: Prop, r: &Relation, d: &Expr, range: &Expr) -> Result<Formula, CompileError> {
    if r.arity() != 2 {
        return Err(CompileError::NonBinaryQualifier {
            keyword: keyword.keyword(),
            relation: r.name().to_string(),
            arity: r.arity(),
        });
    }
    let rel = Expr::rel(r);
    let field = if d == range {
        d.clone()
    } else {
        d.clone().union(range.clone())
    };
    let x_in = |a: &str, b: &str| var(a).in_(var(b).join(rel.clone()));
    let e = |p: Prop| expand_qualifier(p, r, d, range);
    let both = |a: Formula, b: Formula| a.and(b);
    Ok(match keyword {
        Prop::Acyclic => all1("x", d, var("x").in_(var("x").join(rel.clone().closure())).not()),
        Prop::Transitive => rel.clone().join(rel.clone()).in_(rel.clone()),
        Prop::Reflexive => all1("x", d, x_in("x", "x")),
        Prop::Irreflexive => all1("x", d, x_in("x", "x").not()),
        Prop::Symmetric => rel.clone().transpose().in_(rel.clone()),
        Prop::Asymmetric => all2(&field, x_in("x", "y").implies(x_in("y", "x").not())),
        Prop::Antisymmetric => all2(
            &field,
            x_in("x", "y").and(x_in("y", "x")).implies(var("x").eq(var("y"))),
        ),
        Prop::Functional => all1("x", d, var("x").join(rel.clone()).lone()),
        Prop::Total => all1("x", d, var("x").join(rel.clone()).some()),
        Prop::Injective => all1("y", range, rel.clone().join(var("y")).lone()),
        Prop::Surjective => all1("y", range, rel.clone().join(var("y")).some()),
        Prop::Bijective => both(both(e(Prop::Functional)?, e(Prop::Injective)?), e(Prop::Surjective)?),
        Prop::Bijection => both(e(Prop::Bijective)?, e(Prop::Total)?),
        Prop::Complete => all2(
            d,
            var("x").eq(var("y")).not().implies(x_in("x", "y").or(x_in("y", "x"))),
        ),
        Prop::Preorder => both(e(Prop::Reflexive)?, e(Prop::Transitive)?),
        Prop::Equivalence => both(e(Prop::Preorder)?, e(Prop::Symmetric)?),
        Prop::PartialOrder => both(e(Prop::Preorder)?, e(Prop::Antisymmetric)?),
        Prop::TotalOrder => both(e(Prop::PartialOrder)?, e(Prop::Complete)?),
    })
}

/// `lo <= #e <= hi` for a multiplicity range, or `None` when vacuous.
fn count_range(e: Expr, lower: u32, upper: Option<u32>) -> Option<Formula> {
    match (lower, upper) {
        (0, None) => None,
        (1, None) => Some(e.some()),
        (0, Some(0)) => Some(e.no()),
        (0, Some(1)) => Some(e.lone()),
        (1, Some(1)) => Some(e.one()),
        (lo, hi) => {
            let mut parts = Vec::new();
            if lo > 0 {
                parts.push(e.clone().count().lt(IntExpr::literal(lo as i64)).not());
            }
            if let Some(hi) = hi {
                parts.push(e.count().gt(IntExpr::literal(hi as i64)).not());
            }
            Formula::and_all(parts)
        }
    }
}

struct Lowering<'a> {
    mm: &'a ResolvedMetamodel,
    problem: RelationalProblem,
}

impl Lowering<'_> {
    fn add(&mut self, label: String, f: Formula, span: &SourceSpan, cat: Category) {
        self.problem.add(label, f, Some(span.clone()), cat);
    }

    fn classes(&mut self) {
        let mm = self.mm;
        for c in mm.classes.values() {
            let rel = Expr::rel(&class_relation(&c.name));
            for s in &c.supers {
                self.add(
                    format!("{} extends {s}", c.name),
                    rel.clone().in_(Expr::rel(&class_relation(s))),
                    &c.span,
                    Category::Structure,
                );
            }
            if c.is_abstract {
                let subs = mm.direct_subclasses(&c.name);
                let f = match mm.union_of_classes(subs) {
                    Some(u) => rel.clone().eq(u),
                    None => rel.clone().no(),
                };
                self.add(format!("{} is abstract", c.name), f, &c.span, Category::Structure);
            }
        }
        let concrete = mm.concrete_classes();
        for (i, a) in concrete.iter().enumerate() {
            for b in &concrete[i + 1..] {
                let related = mm.is_subclass(a, b) || mm.is_subclass(b, a);
                let shared = mm
                    .classes
                    .values()
                    .any(|c| mm.is_subclass(&c.name, a) && mm.is_subclass(&c.name, b));
                if related || shared {
                    continue;
                }
                let f = Expr::rel(&class_relation(a))
                    .intersection(Expr::rel(&class_relation(b)))
                    .no();
                self.add(
                    format!("{a} and {b} are disjoint"),
                    f,
                    &mm.classes[*a].span,
                    Category::Structure,
                );
            }
        }
        let Some(objects) = mm.objects_expr() else {
            return;
        };
        let class = Expr::rel(&class_builtin());
        let atoms = Expr::union_all(concrete.iter().map(|c| Expr::rel(&class_atom_relation(c)))).unwrap();
        let first = &mm.classes[concrete[0]].span;
        self.add(
            "class maps each object to one class".into(),
            class.clone().in_(objects.clone().product(atoms)).and(all1(
                "x",
                &objects,
                var("x").join(class.clone()).one(),
            )),
            first,
            Category::Structure,
        );
        for c in &concrete {
            let own = Expr::rel(&class_relation(c));
            let exact = match mm.union_of_classes(mm.direct_subclasses(c)) {
                Some(subs) => own.difference(subs),
                None => own,
            };
            let f = class.clone().join(Expr::rel(&class_atom_relation(c))).eq(exact);
            self.add(format!("class of {c}"), f, &mm.classes[*c].span, Category::Structure);
        }
    }

    fn cardinalities(&mut self) {
        let mm = self.mm;
        for card in &mm.cardinalities {
            let Some(e) = mm.union_of_classes(card.classes.iter().map(String::as_str)) else {
                continue;
            };
            let (label, f) = match card.kind {
                CardinalityKind::Keyword(m) => (format!("{} {}", m.keyword(), card.base), Formula::mult(m, e)),
                CardinalityKind::Range(lo, hi) => match count_range(e, lo, Some(hi)) {
                    Some(f) => (format!("{} in [{lo}, {hi}]", card.base), f),
                    None => continue,
                },
            };
            self.add(label, f, &card.span, Category::Cardinality);
        }
    }

    fn feature(&mut self, f: &FeatureInfo) {
        let mm = self.mm;
        let r = Expr::rel(&f.relation);
        let dom = mm.domain_expr(f);
        let range = mm.tys_expr(&f.target);
        let rname = f.relation.name().to_string();
        match &range {
            Some(range) => self.add(
                format!("type of {rname}"),
                r.clone().in_(dom.clone().product(range.clone())),
                &f.span,
                Category::Structure,
            ),
            None => self.add(format!("type of {rname}"), r.clone().no(), &f.span, Category::Structure),
        }
        if f.owner_targets.len() > 1 && f.owner_targets.iter().any(|(_, t)| *t != f.target) {
            for (owner, t) in &f.owner_targets {
                let own = Expr::rel(&class_relation(owner));
                let body = match mm.tys_expr(t) {
                    Some(te) => var("x").join(r.clone()).in_(te),
                    None => var("x").join(r.clone()).no(),
                };
                self.add(
                    format!("type of {rname} in {owner}"),
                    all1("x", &own, body),
                    &f.span,
                    Category::Structure,
                );
            }
        }
        self.multiplicity(f, &r, &dom);
        if let Some((m, span)) = &f.cardinality {
            let values = dom.clone().join(r.clone());
            self.add(
                format!("{} {rname}", m.keyword()),
                Formula::mult(*m, values),
                span,
                Category::Cardinality,
            );
        }
        let range = range.unwrap_or_else(|| dom.clone());
        for (p, span) in &f.props {
            let formula = expand_qualifier(*p, &f.relation, &dom, &range).expect("features are binary");
            self.add(format!("{} {rname}", p.keyword()), formula, span, Category::Qualifier);
        }
        if let Some(span) = &f.id {
            let a = var("a").join(r.clone());
            let b = var("b").join(r.clone());
            let body = a.clone().eq(b).and(a.some()).implies(var("a").eq(var("b")));
            let formula = Formula::forall(vec![Decl::new("a", dom.clone()), Decl::new("b", dom.clone())], body);
            self.add(format!("id {rname}"), formula, span, Category::Qualifier);
        }
    }

    fn multiplicity(&mut self, f: &FeatureInfo, r: &Expr, dom: &Expr) {
        let MultSpec { lower, upper, span } = &f.mult;
        if let Some(body) = count_range(var("x").join(r.clone()), *lower, *upper) {
            self.add(
                format!("{} {}", f.mult, f.relation.name()),
                all1("x", dom, body),
                span,
                Category::Multiplicity,
            );
        }
    }

    fn containment(&mut self) {
        let mm = self.mm;
        let composing: Vec<&FeatureInfo> = mm.features.iter().filter(|f| f.composes.is_some()).collect();
        let Some(first) = composing.first() else {
            return;
        };
        let span = first.composes.clone().unwrap();
        let k = Expr::union_all(composing.iter().map(|f| Expr::rel(&f.relation))).unwrap();
        let objects = mm.objects_expr().expect("a composing feature has an owner");
        let f = all1("y", &objects, k.clone().join(var("y")).lone()).and(all1(
            "x",
            &objects,
            var("x").in_(var("x").join(k.closure())).not(),
        ));
        self.add("containment".into(), f, &span, Category::Structure);
    }
}

/// Lowers `mm` into relations and span-tagged constraints.
pub fn compile(mm: &ResolvedMetamodel) -> RelationalProblem {
    let mut l = Lowering {
        mm,
        problem: RelationalProblem::new(),
    };
    for c in mm.classes.keys() {
        l.problem.declare(class_relation(c));
    }
    if !mm.concrete_classes().is_empty() {
        l.problem.declare(class_builtin());
    }
    for f in &mm.features {
        l.problem.declare(f.relation.clone());
    }
    l.classes();
    l.cardinalities();
    for f in &mm.features {
        l.feature(f);
    }
    l.containment();
    for inv in &mm.invariants {
        l.problem.add(
            inv.label(),
            inv.formula.clone(),
            Some(inv.span.clone()),
            Category::Invariant,
        );
    }
    // Pools, literals and class atoms are declared as they are referenced.
    let mut used = Vec::new();
    for c in &l.problem.constraints {
        visit_relations(&c.formula, &mut |r| {
            if !used.contains(r) {
                used.push(r.clone());
            }
        });
    }
    used.sort();
    for r in used {
        l.problem.declare(r);
    }
    l.problem
}

/// The multiplicity keyword for a class cardinality, if any caps its size.
pub fn cardinality_cap(m: Multiplicity) -> Option<u32> {
    match m {
        Multiplicity::One | Multiplicity::Lone => Some(1),
        Multiplicity::Some | Multiplicity::No => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::load_metamodel;

    #[test]
    fn minimal_lowering() {
        let mm = load_metamodel("package p { class C { } }", "t.aie").unwrap();
        let p = compile(&mm);
        let names: Vec<&str> = p.relations.iter().map(|r| r.name()).collect();
        assert_eq!(names, vec!["C", "class", "@C"]);
        assert!(p.constraints.iter().all(|c| c.category != Category::Qualifier));
    }

    #[test]
    fn acyclic_rendering() {
        let d = Expr::rel(&Relation::unary("List"));
        let f = expand_qualifier(Prop::Acyclic, &Relation::binary("cdr"), &d, &d).unwrap();
        assert_eq!(f.to_string(), "all x: List | !(x in x.^cdr)");
    }

    #[test]
    fn non_binary_qualifier() {
        let d = Expr::rel(&Relation::unary("A"));
        let e = expand_qualifier(Prop::Acyclic, &Relation::unary("A"), &d, &d).unwrap_err();
        assert!(matches!(e, CompileError::NonBinaryQualifier { arity: 1, .. }));
    }
}
