//! Reference semantics: computes the value of any node over a concrete
//! instance. Everything else in the crate is checked against this.

use std::collections::HashMap;

use super::ast::*;
use super::{ConcreteInstance, KernelError, TupleSet};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Set(TupleSet),
    Bool(bool),
    Int(i64),
}

#[derive(Clone, Copy, Debug)]
pub enum Node<'a> {
    Formula(&'a Formula),
    Expr(&'a Expr),
    Int(&'a IntExpr),
}

/// Variable bindings; each value must be a singleton arity-1 set.
pub type Env = HashMap<Variable, TupleSet>;

/// Two's-complement wraparound of `v` into `bitwidth` bits.
pub fn wrap(v: i128, bitwidth: u32) -> i64 {
    let modulus = 1i128 << bitwidth;
    let mut r = v.rem_euclid(modulus);
    if r >= modulus / 2 {
        r -= modulus;
    }
    r as i64
}

pub fn int_range(bitwidth: u32) -> (i64, i64) {
    (-(1i64 << (bitwidth - 1)), (1i64 << (bitwidth - 1)) - 1)
}

pub fn evaluate(instance: &ConcreteInstance, node: Node<'_>, env: &Env) -> Result<Value, KernelError> {
    let mut bindings = Vec::with_capacity(env.len());
    for (var, value) in env {
        if value.arity() != 1 || value.len() != 1 {
            return Err(KernelError::NotSingleton(var.name().to_string()));
        }
        bindings.push((var.clone(), value.iter().next().unwrap()[0]));
    }
    let mut ev = Evaluator { instance, bindings };
    Ok(match node {
        Node::Formula(f) => Value::Bool(ev.formula(f)?),
        Node::Expr(e) => Value::Set(ev.expr(e)?),
        Node::Int(i) => Value::Int(ev.int(i)?),
    })
}

/// Truth of a closed formula.
pub fn holds(instance: &ConcreteInstance, f: &Formula) -> Result<bool, KernelError> {
    Evaluator::new(instance).formula(f)
}

pub struct Evaluator<'a> {
    instance: &'a ConcreteInstance,
    bindings: Vec<(Variable, usize)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(instance: &'a ConcreteInstance) -> Self {
        Evaluator {
            instance,
            bindings: Vec::new(),
        }
    }

    fn lookup(&self, v: &Variable) -> Option<usize> {
        self.bindings.iter().rev().find(|(w, _)| w == v).map(|&(_, a)| a)
    }

    fn wrap(&self, v: i128) -> i64 {
        wrap(v, self.instance.bitwidth())
    }

    pub fn formula(&mut self, f: &Formula) -> Result<bool, KernelError> {
        Ok(match &f.kind {
            FormulaKind::Subset(a, b) => self.expr(a)?.is_subset(&self.expr(b)?),
            FormulaKind::Equal(a, b) => self.expr(a)? == self.expr(b)?,
            FormulaKind::Mult(m, e) => {
                let n = self.expr(e)?.len();
                match m {
                    Multiplicity::Some => n > 0,
                    Multiplicity::One => n == 1,
                    Multiplicity::Lone => n <= 1,
                    Multiplicity::No => n == 0,
                }
            }
            FormulaKind::Not(g) => !self.formula(g)?,
            FormulaKind::And(a, b) => self.formula(a)? && self.formula(b)?,
            FormulaKind::Or(a, b) => self.formula(a)? || self.formula(b)?,
            FormulaKind::Implies(a, b) => !self.formula(a)? || self.formula(b)?,
            FormulaKind::Forall(decls, body) => self.quantify(decls, body, true)?,
            FormulaKind::Exists(decls, body) => self.quantify(decls, body, false)?,
            FormulaKind::IntCompare(op, a, b) => {
                let (x, y) = (self.int(a)?, self.int(b)?);
                match op {
                    IntCmp::Eq => x == y,
                    IntCmp::Lt => x < y,
                    IntCmp::Gt => x > y,
                }
            }
        })
    }

    fn quantify(&mut self, decls: &[Decl], body: &Formula, universal: bool) -> Result<bool, KernelError> {
        let Some((first, rest)) = decls.split_first() else {
            return self.formula(body);
        };
        let domain = self.expr(&first.expr)?;
        for t in domain.iter() {
            self.bindings.push((first.var.clone(), t[0]));
            let r = self.quantify(rest, body, universal);
            self.bindings.pop();
            if r? != universal {
                return Ok(!universal);
            }
        }
        Ok(universal)
    }

    fn comprehend(
        &mut self,
        decls: &[Decl],
        body: &Formula,
        prefix: &mut Vec<usize>,
        out: &mut TupleSet,
    ) -> Result<(), KernelError> {
        let Some((first, rest)) = decls.split_first() else {
            if self.formula(body)? {
                out.insert(prefix.clone())?;
            }
            return Ok(());
        };
        let domain = self.expr(&first.expr)?;
        for t in domain.iter() {
            self.bindings.push((first.var.clone(), t[0]));
            prefix.push(t[0]);
            let r = self.comprehend(rest, body, prefix, out);
            prefix.pop();
            self.bindings.pop();
            r?;
        }
        Ok(())
    }

    pub fn expr(&mut self, e: &Expr) -> Result<TupleSet, KernelError> {
        let universe = self.instance.universe();
        Ok(match &e.kind {
            ExprKind::Var(v) => {
                let atom = self
                    .lookup(v)
                    .ok_or_else(|| KernelError::UnboundVariable(v.name().to_string()))?;
                TupleSet::singleton(universe, atom)
            }
            ExprKind::Rel(r) => self
                .instance
                .get(r)
                .cloned()
                .ok_or_else(|| KernelError::UnboundRelation(r.name().to_string()))?,
            ExprKind::Univ => TupleSet::univ(universe),
            ExprKind::Transpose(a) => self.binary(a)?.transpose(),
            ExprKind::Closure(a) => self.binary(a)?.closure(),
            ExprKind::Union(a, b) => self.same_arity(a, b, TupleSet::union)?,
            ExprKind::Intersection(a, b) => self.same_arity(a, b, TupleSet::intersection)?,
            ExprKind::Difference(a, b) => self.same_arity(a, b, TupleSet::difference)?,
            ExprKind::Join(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                if x.arity() + y.arity() < 3 {
                    return Err(KernelError::JoinArity {
                        left: x.arity(),
                        right: y.arity(),
                    });
                }
                x.join(&y)
            }
            ExprKind::Product(a, b) => self.expr(a)?.product(&self.expr(b)?),
            ExprKind::IfThenElse(c, a, b) => {
                if self.formula(c)? {
                    self.expr(a)?
                } else {
                    self.expr(b)?
                }
            }
            ExprKind::Comprehension(decls, body) => {
                let mut out = TupleSet::empty(universe, decls.len());
                self.comprehend(decls, body, &mut Vec::new(), &mut out)?;
                out
            }
            ExprKind::Project(a, cols) => {
                let set = self.expr(a)?;
                let mut columns = Vec::with_capacity(cols.len());
                for c in cols {
                    let k = self.int(c)?;
                    if k < 0 || k as usize >= set.arity() {
                        return Err(KernelError::ColumnOutOfRange {
                            column: k,
                            arity: set.arity(),
                        });
                    }
                    columns.push(k as usize);
                }
                set.project(&columns)
            }
            ExprKind::IntCast(i) => {
                let v = self.int(i)?;
                match self.instance.ints().get(&v) {
                    Some(&atom) => TupleSet::singleton(universe, atom),
                    None => TupleSet::empty(universe, 1),
                }
            }
        })
    }

    fn binary(&mut self, e: &Expr) -> Result<TupleSet, KernelError> {
        let s = self.expr(e)?;
        if s.arity() != 2 {
            return Err(KernelError::ArityMismatch {
                expected: 2,
                found: s.arity(),
            });
        }
        Ok(s)
    }

    fn same_arity(
        &mut self,
        a: &Expr,
        b: &Expr,
        op: fn(&TupleSet, &TupleSet) -> TupleSet,
    ) -> Result<TupleSet, KernelError> {
        let (x, y) = (self.expr(a)?, self.expr(b)?);
        if x.arity() != y.arity() {
            return Err(KernelError::ArityMismatch {
                expected: x.arity(),
                found: y.arity(),
            });
        }
        Ok(op(&x, &y))
    }

    pub fn int(&mut self, i: &IntExpr) -> Result<i64, KernelError> {
        Ok(match &i.kind {
            IntExprKind::Literal(v) => {
                let (lo, hi) = int_range(self.instance.bitwidth());
                if *v < lo || *v > hi {
                    return Err(KernelError::IntOutOfRange(*v));
                }
                *v
            }
            IntExprKind::Card(e) => {
                let n = self.expr(e)?.len();
                self.wrap(n as i128)
            }
            IntExprKind::Sum(e) => {
                let set = self.expr(e)?;
                let total: i128 = set
                    .iter()
                    .filter_map(|t| self.instance.int_value(t[0]))
                    .map(i128::from)
                    .sum();
                self.wrap(total)
            }
            IntExprKind::Arith(op, a, b) => {
                let (x, y) = (self.int(a)? as i128, self.int(b)? as i128);
                let v = match op {
                    IntOp::Add => x + y,
                    IntOp::Sub => x - y,
                    IntOp::Mul => x * y,
                    IntOp::Div => {
                        if y == 0 {
                            return Err(KernelError::DivisionByZero);
                        }
                        x / y
                    }
                };
                self.wrap(v)
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Relation, Universe};

    fn inst(atoms: &[&str], bitwidth: u32) -> ConcreteInstance {
        ConcreteInstance::new(Universe::new(atoms.iter().copied()).unwrap(), bitwidth)
    }

    #[test]
    fn univ_is_every_atom() {
        let i = inst(&["a", "b"], 8);
        let v = evaluate(&i, Node::Expr(&Expr::univ()), &Env::new()).unwrap();
        assert_eq!(v, Value::Set(TupleSet::univ(i.universe())));
    }

    #[test]
    fn cardinality_and_wraparound() {
        let mut i = inst(&["a", "b"], 4);
        let r = Relation::unary("r");
        i.set(&r, TupleSet::from_names(i.universe(), 1, [["a"], ["b"]]).unwrap())
            .unwrap();
        let card = Expr::rel(&r).count();
        assert_eq!(Evaluator::new(&i).int(&card).unwrap(), 2);
        let two = IntExpr::literal(2).plus(IntExpr::literal(2));
        assert_eq!(Evaluator::new(&i).int(&two).unwrap(), 4);
        let over = IntExpr::literal(7).plus(IntExpr::literal(1));
        assert_eq!(Evaluator::new(&i).int(&over).unwrap(), -8);
    }

    #[test]
    fn division_truncates_and_rejects_zero() {
        let i = inst(&["a"], 8);
        let q = IntExpr::arith(IntOp::Div, IntExpr::literal(-7), IntExpr::literal(2));
        assert_eq!(Evaluator::new(&i).int(&q).unwrap(), -3);
        let z = IntExpr::arith(IntOp::Div, IntExpr::literal(1), IntExpr::literal(0));
        assert_eq!(Evaluator::new(&i).int(&z).unwrap_err(), KernelError::DivisionByZero);
    }

    #[test]
    fn literal_outside_bitwidth() {
        let i = inst(&["a"], 4);
        assert_eq!(
            Evaluator::new(&i).int(&IntExpr::literal(8)).unwrap_err(),
            KernelError::IntOutOfRange(8)
        );
    }

    #[test]
    fn unbound_variable() {
        let i = inst(&["a"], 8);
        let f = Expr::var("x").some();
        assert_eq!(holds(&i, &f).unwrap_err(), KernelError::UnboundVariable("x".into()));
    }

    #[test]
    fn env_binds_variables() {
        let i = inst(&["a", "b"], 8);
        let mut env = Env::new();
        env.insert(Variable::new("x"), TupleSet::singleton(i.universe(), 1));
        let v = evaluate(&i, Node::Expr(&Expr::var("x")), &env).unwrap();
        assert_eq!(v, Value::Set(TupleSet::singleton(i.universe(), 1)));
    }

    #[test]
    fn self_loop_violates_acyclicity() {
        let mut i = inst(&["TruckList$0"], 8);
        let list = Relation::unary("List");
        let cdr = Relation::binary("cdr");
        let u = i.universe().clone();
        i.set(&list, TupleSet::from_names(&u, 1, [["TruckList$0"]]).unwrap())
            .unwrap();
        i.set(
            &cdr,
            TupleSet::from_names(&u, 2, [["TruckList$0", "TruckList$0"]]).unwrap(),
        )
        .unwrap();
        let acyclic = Formula::forall(
            vec![Decl::new("x", Expr::rel(&list))],
            Expr::var("x").in_(Expr::var("x").join(Expr::rel(&cdr).closure())).not(),
        );
        assert!(!holds(&i, &acyclic).unwrap());
    }

    #[test]
    fn int_cast_without_atom_is_empty() {
        let mut i = inst(&["0", "1"], 8);
        i.set_ints([(0, 0), (1, 1)].into_iter().collect());
        let hit = Expr::int_cast(IntExpr::literal(1));
        assert_eq!(
            Evaluator::new(&i).expr(&hit).unwrap(),
            TupleSet::singleton(i.universe(), 1)
        );
        let miss = Expr::int_cast(IntExpr::literal(5));
        assert!(Evaluator::new(&i).expr(&miss).unwrap().is_empty());
        let s = Expr::univ().sum();
        assert_eq!(Evaluator::new(&i).int(&s).unwrap(), 1);
    }
}
