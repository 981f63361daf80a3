//! Abstract syntax for formulas, relational expressions and integer
//! expressions.
//!
//! Every node carries an optional [`SourceSpan`]. Spans are metadata: node
//! equality and hashing ignore them.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::{KernelError, Relation};
use crate::span::SourceSpan;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Variable(Arc<str>);

impl Variable {
    pub fn new(name: impl Into<Arc<str>>) -> Self {
        Variable(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Multiplicity {
    Some,
    One,
    Lone,
    No,
}

impl Multiplicity {
    pub fn keyword(self) -> &'static str {
        match self {
            Multiplicity::Some => "some",
            Multiplicity::One => "one",
            Multiplicity::Lone => "lone",
            Multiplicity::No => "no",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntCmp {
    Eq,
    Lt,
    Gt,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum IntOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// `var : expr` in a quantifier or comprehension.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decl {
    pub var: Variable,
    pub expr: Expr,
}

impl Decl {
    pub fn new(var: impl Into<Arc<str>>, expr: Expr) -> Self {
        Decl {
            var: Variable::new(var),
            expr,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Formula {
    pub kind: FormulaKind,
    pub span: Option<SourceSpan>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FormulaKind {
    Subset(Box<Expr>, Box<Expr>),
    Equal(Box<Expr>, Box<Expr>),
    Mult(Multiplicity, Box<Expr>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Forall(Vec<Decl>, Box<Formula>),
    Exists(Vec<Decl>, Box<Formula>),
    IntCompare(IntCmp, Box<IntExpr>, Box<IntExpr>),
}

#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Option<SourceSpan>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExprKind {
    /// A bound variable, or a not-yet-resolved name in parsed input.
    Var(Variable),
    Rel(Relation),
    Univ,
    Transpose(Box<Expr>),
    Closure(Box<Expr>),
    Union(Box<Expr>, Box<Expr>),
    Intersection(Box<Expr>, Box<Expr>),
    Difference(Box<Expr>, Box<Expr>),
    Join(Box<Expr>, Box<Expr>),
    Product(Box<Expr>, Box<Expr>),
    IfThenElse(Box<Formula>, Box<Expr>, Box<Expr>),
    Comprehension(Vec<Decl>, Box<Formula>),
    Project(Box<Expr>, Vec<IntExpr>),
    IntCast(Box<IntExpr>),
}

#[derive(Clone, Debug)]
pub struct IntExpr {
    pub kind: IntExprKind,
    pub span: Option<SourceSpan>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntExprKind {
    Literal(i64),
    Card(Box<Expr>),
    Sum(Box<Expr>),
    Arith(IntOp, Box<IntExpr>, Box<IntExpr>),
}

macro_rules! span_blind {
    ($ty:ident) => {
        impl PartialEq for $ty {
            fn eq(&self, other: &Self) -> bool {
                self.kind == other.kind
            }
        }
        impl Eq for $ty {}
        impl Hash for $ty {
            fn hash<H: Hasher>(&self, state: &mut H) {
                self.kind.hash(state)
            }
        }
        impl $ty {
            pub fn with_span(mut self, span: Option<SourceSpan>) -> Self {
                self.span = span;
                self
            }
        }
    };
}

span_blind!(Formula);
span_blind!(Expr);
span_blind!(IntExpr);

impl From<FormulaKind> for Formula {
    fn from(kind: FormulaKind) -> Self {
        Formula { kind, span: None }
    }
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Self {
        Expr { kind, span: None }
    }
}

impl From<IntExprKind> for IntExpr {
    fn from(kind: IntExprKind) -> Self {
        IntExpr { kind, span: None }
    }
}

fn bx<T>(t: T) -> Box<T> {
    Box::new(t)
}

impl Expr {
    pub fn var(name: impl Into<Arc<str>>) -> Expr {
        ExprKind::Var(Variable::new(name)).into()
    }

    pub fn rel(r: &Relation) -> Expr {
        ExprKind::Rel(r.clone()).into()
    }

    pub fn univ() -> Expr {
        ExprKind::Univ.into()
    }

    pub fn transpose(self) -> Expr {
        ExprKind::Transpose(bx(self)).into()
    }

    pub fn closure(self) -> Expr {
        ExprKind::Closure(bx(self)).into()
    }

    pub fn union(self, other: Expr) -> Expr {
        ExprKind::Union(bx(self), bx(other)).into()
    }

    pub fn intersection(self, other: Expr) -> Expr {
        ExprKind::Intersection(bx(self), bx(other)).into()
    }

    pub fn difference(self, other: Expr) -> Expr {
        ExprKind::Difference(bx(self), bx(other)).into()
    }

    pub fn join(self, other: Expr) -> Expr {
        ExprKind::Join(bx(self), bx(other)).into()
    }

    pub fn product(self, other: Expr) -> Expr {
        ExprKind::Product(bx(self), bx(other)).into()
    }

    pub fn ite(cond: Formula, then: Expr, otherwise: Expr) -> Expr {
        ExprKind::IfThenElse(bx(cond), bx(then), bx(otherwise)).into()
    }

    pub fn comprehension(decls: Vec<Decl>, body: Formula) -> Expr {
        ExprKind::Comprehension(decls, bx(body)).into()
    }

    pub fn project(self, columns: Vec<IntExpr>) -> Expr {
        ExprKind::Project(bx(self), columns).into()
    }

    pub fn int_cast(value: IntExpr) -> Expr {
        ExprKind::IntCast(bx(value)).into()
    }

    /// Left-nested union of `exprs`; `None` when empty.
    pub fn union_all(exprs: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        exprs.into_iter().reduce(Expr::union)
    }

    pub fn in_(self, other: Expr) -> Formula {
        FormulaKind::Subset(bx(self), bx(other)).into()
    }

    pub fn eq(self, other: Expr) -> Formula {
        FormulaKind::Equal(bx(self), bx(other)).into()
    }

    pub fn some(self) -> Formula {
        FormulaKind::Mult(Multiplicity::Some, bx(self)).into()
    }

    pub fn one(self) -> Formula {
        FormulaKind::Mult(Multiplicity::One, bx(self)).into()
    }

    pub fn lone(self) -> Formula {
        FormulaKind::Mult(Multiplicity::Lone, bx(self)).into()
    }

    pub fn no(self) -> Formula {
        FormulaKind::Mult(Multiplicity::No, bx(self)).into()
    }

    pub fn count(self) -> IntExpr {
        IntExprKind::Card(bx(self)).into()
    }

    pub fn sum(self) -> IntExpr {
        IntExprKind::Sum(bx(self)).into()
    }

    /// Arity of this expression, checking well-formedness of every subterm.
    /// Variables always have arity 1.
    pub fn arity(&self) -> Result<usize, KernelError> {
        let mismatch = |expected, found| KernelError::ArityMismatch { expected, found };
        Ok(match &self.kind {
            ExprKind::Var(_) | ExprKind::Univ | ExprKind::IntCast(_) => {
                if let ExprKind::IntCast(i) = &self.kind {
                    i.check()?;
                }
                1
            }
            ExprKind::Rel(r) => r.arity(),
            ExprKind::Transpose(e) | ExprKind::Closure(e) => {
                let a = e.arity()?;
                if a != 2 {
                    return Err(mismatch(2, a));
                }
                2
            }
            ExprKind::Union(a, b) | ExprKind::Intersection(a, b) | ExprKind::Difference(a, b) => {
                let (x, y) = (a.arity()?, b.arity()?);
                if x != y {
                    return Err(mismatch(x, y));
                }
                x
            }
            ExprKind::Join(a, b) => {
                let (x, y) = (a.arity()?, b.arity()?);
                if x + y < 3 {
                    return Err(KernelError::JoinArity { left: x, right: y });
                }
                x + y - 2
            }
            ExprKind::Product(a, b) => a.arity()? + b.arity()?,
            ExprKind::IfThenElse(c, a, b) => {
                c.check()?;
                let (x, y) = (a.arity()?, b.arity()?);
                if x != y {
                    return Err(mismatch(x, y));
                }
                x
            }
            ExprKind::Comprehension(decls, body) => {
                check_decls(decls)?;
                body.check()?;
                decls.len()
            }
            ExprKind::Project(e, cols) => {
                let a = e.arity()?;
                if cols.is_empty() {
                    return Err(mismatch(1, 0));
                }
                for c in cols {
                    match c.constant() {
                        Some(k) if k >= 0 && (k as usize) < a => {}
                        Some(k) => return Err(KernelError::ColumnOutOfRange { column: k, arity: a }),
                        None => return Err(KernelError::NonConstantColumn),
                    }
                }
                cols.len()
            }
        })
    }
}

fn check_decls(decls: &[Decl]) -> Result<(), KernelError> {
    for d in decls {
        let a = d.expr.arity()?;
        if a != 1 {
            return Err(KernelError::ArityMismatch { expected: 1, found: a });
        }
    }
    Ok(())
}

impl Formula {
    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Formula {
        FormulaKind::Not(bx(self)).into()
    }

    pub fn and(self, other: Formula) -> Formula {
        FormulaKind::And(bx(self), bx(other)).into()
    }

    pub fn or(self, other: Formula) -> Formula {
        FormulaKind::Or(bx(self), bx(other)).into()
    }

    pub fn implies(self, other: Formula) -> Formula {
        FormulaKind::Implies(bx(self), bx(other)).into()
    }

    pub fn forall(decls: Vec<Decl>, body: Formula) -> Formula {
        FormulaKind::Forall(decls, bx(body)).into()
    }

    pub fn exists(decls: Vec<Decl>, body: Formula) -> Formula {
        FormulaKind::Exists(decls, bx(body)).into()
    }

    pub fn mult(m: Multiplicity, e: Expr) -> Formula {
        FormulaKind::Mult(m, bx(e)).into()
    }

    pub fn compare(op: IntCmp, a: IntExpr, b: IntExpr) -> Formula {
        FormulaKind::IntCompare(op, bx(a), bx(b)).into()
    }

    /// Left-nested conjunction; `None` when empty.
    pub fn and_all(fs: impl IntoIterator<Item = Formula>) -> Option<Formula> {
        fs.into_iter().reduce(Formula::and)
    }

    /// Checks arity well-formedness of every subterm.
    pub fn check(&self) -> Result<(), KernelError> {
        match &self.kind {
            FormulaKind::Subset(a, b) | FormulaKind::Equal(a, b) => {
                let (x, y) = (a.arity()?, b.arity()?);
                if x != y {
                    return Err(KernelError::ArityMismatch { expected: x, found: y });
                }
                Ok(())
            }
            FormulaKind::Mult(_, e) => e.arity().map(|_| ()),
            FormulaKind::Not(f) => f.check(),
            FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Implies(a, b) => {
                a.check()?;
                b.check()
            }
            FormulaKind::Forall(decls, body) | FormulaKind::Exists(decls, body) => {
                check_decls(decls)?;
                body.check()
            }
            FormulaKind::IntCompare(_, a, b) => {
                a.check()?;
                b.check()
            }
        }
    }
}

impl IntExpr {
    pub fn literal(v: i64) -> IntExpr {
        IntExprKind::Literal(v).into()
    }

    pub fn arith(op: IntOp, a: IntExpr, b: IntExpr) -> IntExpr {
        IntExprKind::Arith(op, bx(a), bx(b)).into()
    }

    pub fn plus(self, other: IntExpr) -> IntExpr {
        IntExpr::arith(IntOp::Add, self, other)
    }

    pub fn eq(self, other: IntExpr) -> Formula {
        Formula::compare(IntCmp::Eq, self, other)
    }

    pub fn lt(self, other: IntExpr) -> Formula {
        Formula::compare(IntCmp::Lt, self, other)
    }

    pub fn gt(self, other: IntExpr) -> Formula {
        Formula::compare(IntCmp::Gt, self, other)
    }

    /// The value of a literal, or `None` for anything that needs an instance.
    pub fn constant(&self) -> Option<i64> {
        match self.kind {
            IntExprKind::Literal(v) => Some(v),
            _ => None,
        }
    }

    pub fn check(&self) -> Result<(), KernelError> {
        match &self.kind {
            IntExprKind::Literal(_) => Ok(()),
            IntExprKind::Card(e) => e.arity().map(|_| ()),
            IntExprKind::Sum(e) => {
                let a = e.arity()?;
                if a != 1 {
                    return Err(KernelError::ArityMismatch { expected: 1, found: a });
                }
                Ok(())
            }
            IntExprKind::Arith(_, a, b) => {
                a.check()?;
                b.check()
            }
        }
    }
}

/// Calls `f` on every relation referenced in `formula`.
pub fn visit_relations(root: &Formula, f: &mut impl FnMut(&Relation)) {
    fn expr(e: &Expr, f: &mut impl FnMut(&Relation)) {
        match &e.kind {
            ExprKind::Var(_) | ExprKind::Univ => {}
            ExprKind::Rel(r) => f(r),
            ExprKind::Transpose(a) | ExprKind::Closure(a) => expr(a, f),
            ExprKind::Union(a, b)
            | ExprKind::Intersection(a, b)
            | ExprKind::Difference(a, b)
            | ExprKind::Join(a, b)
            | ExprKind::Product(a, b) => {
                expr(a, f);
                expr(b, f);
            }
            ExprKind::IfThenElse(c, a, b) => {
                formula(c, f);
                expr(a, f);
                expr(b, f);
            }
            ExprKind::Comprehension(decls, body) => {
                decls.iter().for_each(|d| expr(&d.expr, f));
                formula(body, f);
            }
            ExprKind::Project(e, cols) => {
                expr(e, f);
                cols.iter().for_each(|c| int(c, f));
            }
            ExprKind::IntCast(i) => int(i, f),
        }
    }
    fn int(i: &IntExpr, f: &mut impl FnMut(&Relation)) {
        match &i.kind {
            IntExprKind::Literal(_) => {}
            IntExprKind::Card(e) | IntExprKind::Sum(e) => expr(e, f),
            IntExprKind::Arith(_, a, b) => {
                int(a, f);
                int(b, f);
            }
        }
    }
    fn formula(g: &Formula, f: &mut impl FnMut(&Relation)) {
        match &g.kind {
            FormulaKind::Subset(a, b) | FormulaKind::Equal(a, b) => {
                expr(a, f);
                expr(b, f);
            }
            FormulaKind::Mult(_, e) => expr(e, f),
            FormulaKind::Not(a) => formula(a, f),
            FormulaKind::And(a, b) | FormulaKind::Or(a, b) | FormulaKind::Implies(a, b) => {
                formula(a, f);
                formula(b, f);
            }
            FormulaKind::Forall(decls, body) | FormulaKind::Exists(decls, body) => {
                decls.iter().for_each(|d| expr(&d.expr, f));
                formula(body, f);
            }
            FormulaKind::IntCompare(_, a, b) => {
                int(a, f);
                int(b, f);
            }
        }
    }
    formula(root, f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::RelationKind;

    #[test]
    fn spans_do_not_affect_equality() {
        let a = Expr::var("x");
        let b = Expr::var("x").with_span(Some(SourceSpan::new("f", 1, 1, 1)));
        assert_eq!(a, b);
    }

    #[test]
    fn join_arity() {
        let r = Relation::new("r", 2, RelationKind::Feature);
        let e = Expr::var("x").join(Expr::rel(&r));
        assert_eq!(e.arity().unwrap(), 1);
        let bad = Expr::var("x").join(Expr::var("y"));
        assert!(bad.arity().is_err());
    }

    #[test]
    fn closure_needs_binary() {
        assert!(Expr::var("x").closure().arity().is_err());
    }

    #[test]
    fn projection_columns_checked() {
        let r = Relation::new("r", 2, RelationKind::Feature);
        let ok = Expr::rel(&r).project(vec![IntExpr::literal(1), IntExpr::literal(0)]);
        assert_eq!(ok.arity().unwrap(), 2);
        let bad = Expr::rel(&r).project(vec![IntExpr::literal(2)]);
        assert_eq!(
            bad.arity().unwrap_err(),
            KernelError::ColumnOutOfRange { column: 2, arity: 2 }
        );
    }
}
