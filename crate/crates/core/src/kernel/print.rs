//! ASCII surface syntax for formulas and expressions. The output reparses to
//! a structurally identical tree.

use std::fmt::{self, Display, Formatter, Write};

use super::ast::*;

// Binding strength, loosest first.
const QUANT: u8 = 0;
const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const NOT: u8 = 4;
const ATOM: u8 = 5;
const ADD: u8 = 6;
const MUL: u8 = 7;
const CARD: u8 = 8;
const INTERSECT: u8 = 9;
const PRODUCT: u8 = 10;
const JOIN: u8 = 11;
const UNARY: u8 = 12;
const PRIMARY: u8 = 13;

fn formula_level(f: &Formula) -> u8 {
    match f.kind {
        FormulaKind::Forall(..) | FormulaKind::Exists(..) => QUANT,
        FormulaKind::Implies(..) => IMPLIES,
        FormulaKind::Or(..) => OR,
        FormulaKind::And(..) => AND,
        FormulaKind::Not(..) => NOT,
        _ => ATOM,
    }
}

fn expr_level(e: &Expr) -> u8 {
    match e.kind {
        ExprKind::Union(..) | ExprKind::Difference(..) => ADD,
        ExprKind::Intersection(..) => INTERSECT,
        ExprKind::Product(..) => PRODUCT,
        ExprKind::Join(..) => JOIN,
        ExprKind::Transpose(..) | ExprKind::Closure(..) => UNARY,
        _ => PRIMARY,
    }
}

fn int_level(i: &IntExpr) -> u8 {
    match &i.kind {
        IntExprKind::Arith(IntOp::Add | IntOp::Sub, ..) => ADD,
        IntExprKind::Arith(IntOp::Mul | IntOp::Div, ..) => MUL,
        IntExprKind::Card(_) => CARD,
        _ => PRIMARY,
    }
}

fn formula_at(out: &mut String, f: &Formula, min: u8) {
    if formula_level(f) < min {
        out.push('(');
        formula(out, f);
        out.push(')');
    } else {
        formula(out, f);
    }
}

fn expr_at(out: &mut String, e: &Expr, min: u8) {
    if expr_level(e) < min {
        out.push('(');
        expr(out, e);
        out.push(')');
    } else {
        expr(out, e);
    }
}

fn int_at(out: &mut String, i: &IntExpr, min: u8) {
    if int_level(i) < min {
        out.push('(');
        int(out, i);
        out.push(')');
    } else {
        int(out, i);
    }
}

fn decls(out: &mut String, ds: &[Decl]) {
    for (i, d) in ds.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}: ", d.var);
        expr_at(out, &d.expr, ADD);
    }
}

fn formula(out: &mut String, f: &Formula) {
    match &f.kind {
        FormulaKind::Subset(a, b) => {
            expr_at(out, a, ADD);
            out.push_str(" in ");
            expr_at(out, b, ADD);
        }
        FormulaKind::Equal(a, b) => {
            expr_at(out, a, ADD);
            out.push_str(" = ");
            expr_at(out, b, ADD);
        }
        FormulaKind::Mult(m, e) => {
            out.push_str(m.keyword());
            out.push(' ');
            expr_at(out, e, ADD);
        }
        FormulaKind::Not(g) => {
            out.push('!');
            // Comparisons bind tighter than `!`, but the parentheses read better.
            formula_at(
                out,
                g,
                if matches!(g.kind, FormulaKind::Not(_)) {
                    NOT
                } else {
                    PRIMARY
                },
            );
        }
        FormulaKind::And(a, b) => {
            formula_at(out, a, AND);
            out.push_str(" && ");
            formula_at(out, b, NOT);
        }
        FormulaKind::Or(a, b) => {
            formula_at(out, a, OR);
            out.push_str(" || ");
            formula_at(out, b, AND);
        }
        FormulaKind::Implies(a, b) => {
            formula_at(out, a, OR);
            out.push_str(" => ");
            formula_at(out, b, IMPLIES);
        }
        FormulaKind::Forall(ds, body) | FormulaKind::Exists(ds, body) => {
            out.push_str(if matches!(f.kind, FormulaKind::Forall(..)) {
                "all "
            } else {
                "exists "
            });
            decls(out, ds);
            out.push_str(" | ");
            formula(out, body);
        }
        FormulaKind::IntCompare(op, a, b) => {
            int_at(out, a, ADD);
            out.push_str(match op {
                IntCmp::Eq => " = ",
                IntCmp::Lt => " < ",
                IntCmp::Gt => " > ",
            });
            int_at(out, b, ADD);
        }
    }
}

fn expr(out: &mut String, e: &Expr) {
    let binary = |out: &mut String, a: &Expr, op: &str, b: &Expr, level: u8| {
        expr_at(out, a, level);
        out.push_str(op);
        expr_at(out, b, level + 1);
    };
    match &e.kind {
        ExprKind::Var(v) => out.push_str(v.name()),
        ExprKind::Rel(r) => out.push_str(r.name()),
        ExprKind::Univ => out.push_str("univ"),
        ExprKind::Transpose(a) => {
            out.push('~');
            expr_at(out, a, UNARY);
        }
        ExprKind::Closure(a) => {
            out.push('^');
            expr_at(out, a, UNARY);
        }
        ExprKind::Union(a, b) => binary(out, a, " + ", b, ADD),
        ExprKind::Difference(a, b) => binary(out, a, " - ", b, ADD),
        ExprKind::Intersection(a, b) => binary(out, a, " & ", b, INTERSECT),
        ExprKind::Product(a, b) => binary(out, a, " -> ", b, PRODUCT),
        ExprKind::Join(a, b) => binary(out, a, ".", b, JOIN),
        ExprKind::IfThenElse(c, a, b) => {
            out.push('(');
            formula(out, c);
            out.push_str(" ? ");
            expr_at(out, a, ADD);
            out.push_str(" : ");
            expr_at(out, b, ADD);
            out.push(')');
        }
        ExprKind::Comprehension(ds, body) => {
            out.push('{');
            decls(out, ds);
            out.push_str(" | ");
            formula(out, body);
            out.push('}');
        }
        ExprKind::Project(a, cols) => {
            out.push_str("project(");
            expr(out, a);
            for c in cols {
                out.push_str(", ");
                int(out, c);
            }
            out.push(')');
        }
        ExprKind::IntCast(i) => {
            out.push_str("int2expr(");
            int(out, i);
            out.push(')');
        }
    }
}

fn int(out: &mut String, i: &IntExpr) {
    match &i.kind {
        IntExprKind::Literal(v) => {
            let _ = write!(out, "{v}");
        }
        IntExprKind::Card(e) => {
            out.push('#');
            // `#a & b` parses as `#(a & b)`; the parentheses make that explicit.
            expr_at(out, e, PRODUCT);
        }
        IntExprKind::Sum(e) => {
            out.push_str("sum(");
            expr(out, e);
            out.push(')');
        }
        IntExprKind::Arith(op, a, b) => {
            let (sym, level) = match op {
                IntOp::Add => (" + ", ADD),
                IntOp::Sub => (" - ", ADD),
                IntOp::Mul => (" * ", MUL),
                IntOp::Div => (" / ", MUL),
            };
            int_at(out, a, level);
            out.push_str(sym);
            int_at(out, b, level + 1);
        }
    }
}

impl Display for Formula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        formula(&mut s, self);
        f.write_str(&s)
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        expr(&mut s, self);
        f.write_str(&s)
    }
}

impl Display for IntExpr {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        int(&mut s, self);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::Relation;

    #[test]
    fn acyclic_rendering() {
        let cdr = Relation::binary("cdr");
        let list = Relation::unary("List");
        let f = Formula::forall(
            vec![Decl::new("x", Expr::rel(&list))],
            Expr::var("x").in_(Expr::var("x").join(Expr::rel(&cdr).closure())).not(),
        );
        assert_eq!(f.to_string(), "all x: List | !(x in x.^cdr)");
    }

    #[test]
    fn precedence_parenthesizes() {
        let (a, b, c) = (Expr::var("a"), Expr::var("b"), Expr::var("c"));
        let e = a.clone().union(b.clone()).join(c.clone());
        assert_eq!(e.to_string(), "(a + b).c");
        let e = a.clone().difference(b.clone().union(c.clone()));
        assert_eq!(e.to_string(), "a - (b + c)");
        let f = a.clone().some().and(b.some()).or(c.some());
        assert_eq!(f.to_string(), "some a && some b || some c");
        let i = IntExpr::literal(1).plus(IntExpr::literal(2).plus(IntExpr::literal(3)));
        assert_eq!(i.to_string(), "1 + (2 + 3)");
    }
}
