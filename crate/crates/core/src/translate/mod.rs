//! Relational problems to CNF: per-tuple boolean variables, a hash-consed
//! circuit for every constraint, and a Tseitin encoding guarded by one
//! selector literal per constraint.

mod circuit;
mod ints;
mod matrix;

pub use circuit::{Bit, Circuit};
pub use ints::{decode as decode_int, IntBits};
pub use matrix::BoolMatrix;

use std::collections::{BTreeMap, HashMap};
use std::time::Instant;

use indexmap::IndexMap;
use thiserror::Error;

use crate::kernel::{
    int_range, Bounds, ConcreteInstance, ConstraintId, Decl, Expr, ExprKind, Formula, FormulaKind, IntCmp, IntExpr,
    IntExprKind, IntOp, KernelError, Multiplicity, Relation, RelationalProblem, Tuple, TupleSet, Variable,
};
use crate::sat::{Assignment, ClauseDb, Lit, Var};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("relation `{0}` has no bounds")]
    UnboundedRelation(String),
    #[error("integer {0} does not fit the bitwidth")]
    IntOutOfRange(i64),
    #[error("projection columns must be constants")]
    NonConstantColumn,
    #[error("column {column} is out of range for arity {arity}")]
    ColumnOutOfRange { column: i64, arity: usize },
    #[error("variable `{0}` is not bound")]
    UnboundVariable(String),
    #[error("assignment covers {found} variables, translation has {expected}")]
    IncompleteAssignment { expected: u32, found: u32 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslateOptions {
    pub bitwidth: u32,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions {
            bitwidth: crate::kernel::DEFAULT_BITWIDTH,
        }
    }
}

/// Status of one (relation, tuple) cell under the bounds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellValue {
    True,
    False,
    Var(Var),
}

/// Primary variables: one per tuple in a relation's upper bound but not its
/// lower bound, numbered from 1 in bounds order.
#[derive(Clone, Debug, Default)]
pub struct VarMap {
    vars: IndexMap<Relation, BTreeMap<Tuple, Var>>,
    count: u32,
}

impl VarMap {
    pub fn new(bounds: &Bounds) -> Self {
        let mut map = VarMap::default();
        for (rel, lower, upper) in bounds.entries() {
            let mut cells = BTreeMap::new();
            for t in upper.iter() {
                if !lower.contains(t) {
                    map.count += 1;
                    cells.insert(t.clone(), map.count);
                }
            }
            map.vars.insert(rel.clone(), cells);
        }
        map
    }

    pub fn num_primary(&self) -> u32 {
        self.count
    }

    pub fn lookup(&self, bounds: &Bounds, relation: &Relation, tuple: &[usize]) -> CellValue {
        if let Some(&v) = self.vars.get(relation).and_then(|m| m.get(tuple)) {
            return CellValue::Var(v);
        }
        match bounds.lower(relation) {
            Some(l) if l.contains(tuple) => CellValue::True,
            _ => CellValue::False,
        }
    }

    /// Free cells of `relation` with their variables.
    pub fn cells(&self, relation: &Relation) -> impl Iterator<Item = (&Tuple, Var)> + '_ {
        self.vars
            .get(relation)
            .into_iter()
            .flat_map(|m| m.iter().map(|(t, &v)| (t, v)))
    }

    /// Every primary variable, ascending.
    pub fn primary_vars(&self) -> Vec<Var> {
        (1..=self.count).collect()
    }
}

/// Encodes relational nodes as circuits over the primary variables.
pub struct Encoder<'a> {
    bounds: &'a Bounds,
    bitwidth: u32,
    varmap: &'a VarMap,
    circuit: Circuit,
    bindings: Vec<(Variable, usize)>,
    rel_cache: HashMap<Relation, BoolMatrix>,
}

impl<'a> Encoder<'a> {
    pub fn new(bounds: &'a Bounds, varmap: &'a VarMap, bitwidth: u32) -> Self {
        assert!((1..=32).contains(&bitwidth), "bitwidth must be in 1..=32");
        Encoder {
            bounds,
            bitwidth,
            varmap,
            circuit: Circuit::new(),
            bindings: Vec::new(),
            rel_cache: HashMap::new(),
        }
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    pub fn circuit_mut(&mut self) -> &mut Circuit {
        &mut self.circuit
    }

    fn width(&self) -> usize {
        self.bitwidth as usize
    }

    fn relation(&mut self, r: &Relation) -> Result<BoolMatrix, TranslateError> {
        if let Some(m) = self.rel_cache.get(r) {
            return Ok(m.clone());
        }
        let (lower, upper) = self
            .bounds
            .get(r)
            .ok_or_else(|| TranslateError::UnboundedRelation(r.name().to_string()))?;
        let mut m = BoolMatrix::empty(r.arity());
        for t in upper.iter() {
            let bit = if lower.contains(t) {
                Bit::TRUE
            } else {
                match self.varmap.lookup(self.bounds, r, t) {
                    CellValue::Var(v) => self.circuit.input(v),
                    CellValue::True => Bit::TRUE,
                    CellValue::False => Bit::FALSE,
                }
            };
            m.set(t.clone(), bit);
        }
        self.rel_cache.insert(r.clone(), m.clone());
        Ok(m)
    }

    pub fn formula(&mut self, f: &Formula) -> Result<Bit, TranslateError> {
        Ok(match &f.kind {
            FormulaKind::Subset(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                x.subset(&y, &mut self.circuit)
            }
            FormulaKind::Equal(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                x.equals(&y, &mut self.circuit)
            }
            FormulaKind::Mult(m, e) => {
                let x = self.expr(e)?;
                let c = &mut self.circuit;
                match m {
                    Multiplicity::Some => x.some(c),
                    Multiplicity::No => !x.some(c),
                    Multiplicity::Lone => x.lone(c),
                    Multiplicity::One => x.one(c),
                }
            }
            FormulaKind::Not(g) => !self.formula(g)?,
            FormulaKind::And(a, b) => {
                let x = self.formula(a)?;
                if x == Bit::FALSE {
                    return Ok(x);
                }
                let y = self.formula(b)?;
                self.circuit.and(x, y)
            }
            FormulaKind::Or(a, b) => {
                let x = self.formula(a)?;
                if x == Bit::TRUE {
                    return Ok(x);
                }
                let y = self.formula(b)?;
                self.circuit.or(x, y)
            }
            FormulaKind::Implies(a, b) => {
                let x = self.formula(a)?;
                if x == Bit::FALSE {
                    return Ok(Bit::TRUE);
                }
                let y = self.formula(b)?;
                self.circuit.implies(x, y)
            }
            FormulaKind::Forall(decls, body) => self.quantify(decls, body, true)?,
            FormulaKind::Exists(decls, body) => self.quantify(decls, body, false)?,
            FormulaKind::IntCompare(op, a, b) => {
                let (x, y) = (self.int(a)?, self.int(b)?);
                let c = &mut self.circuit;
                match op {
                    IntCmp::Eq => ints::equal(c, &x, &y),
                    IntCmp::Lt => ints::less_than(c, &x, &y),
                    IntCmp::Gt => ints::less_than(c, &y, &x),
                }
            }
        })
    }

    /// Grounds the quantifier over every atom the declaration may contain.
    fn quantify(&mut self, decls: &[Decl], body: &Formula, universal: bool) -> Result<Bit, TranslateError> {
        let Some((first, rest)) = decls.split_first() else {
            return self.formula(body);
        };
        let domain = self.expr(&first.expr)?;
        let mut parts = Vec::with_capacity(domain.len());
        for (t, member) in domain.cells() {
            self.bindings.push((first.var.clone(), t[0]));
            let inner = self.quantify(rest, body, universal);
            self.bindings.pop();
            let inner = inner?;
            let part = if universal {
                self.circuit.implies(member, inner)
            } else {
                self.circuit.and(member, inner)
            };
            if part == Bit::constant(!universal) {
                return Ok(part);
            }
            parts.push(part);
        }
        Ok(if universal {
            self.circuit.and_all(parts)
        } else {
            self.circuit.or_all(parts)
        })
    }

    fn comprehend(
        &mut self,
        decls: &[Decl],
        body: &Formula,
        prefix: &mut Vec<usize>,
        guard: Bit,
        out: &mut BoolMatrix,
    ) -> Result<(), TranslateError> {
        let Some((first, rest)) = decls.split_first() else {
            let b = self.formula(body)?;
            let v = self.circuit.and(guard, b);
            out.set(prefix.clone(), v);
            return Ok(());
        };
        let domain = self.expr(&first.expr)?;
        for (t, member) in domain.cells() {
            let g = self.circuit.and(guard, member);
            if g == Bit::FALSE {
                continue;
            }
            self.bindings.push((first.var.clone(), t[0]));
            prefix.push(t[0]);
            let r = self.comprehend(rest, body, prefix, g, out);
            prefix.pop();
            self.bindings.pop();
            r?;
        }
        Ok(())
    }

    pub fn expr(&mut self, e: &Expr) -> Result<BoolMatrix, TranslateError> {
        Ok(match &e.kind {
            ExprKind::Var(v) => {
                let atom = self
                    .bindings
                    .iter()
                    .rev()
                    .find(|(w, _)| w == v)
                    .map(|&(_, a)| a)
                    .ok_or_else(|| TranslateError::UnboundVariable(v.name().to_string()))?;
                let mut m = BoolMatrix::empty(1);
                m.set(vec![atom], Bit::TRUE);
                m
            }
            ExprKind::Rel(r) => self.relation(r)?,
            ExprKind::Univ => {
                let mut m = BoolMatrix::empty(1);
                for i in 0..self.bounds.universe().size() {
                    m.set(vec![i], Bit::TRUE);
                }
                m
            }
            ExprKind::Transpose(a) => self.expr(a)?.transpose(),
            ExprKind::Closure(a) => self.expr(a)?.closure(&mut self.circuit),
            ExprKind::Union(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                x.union(&y, &mut self.circuit)
            }
            ExprKind::Intersection(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                x.intersection(&y, &mut self.circuit)
            }
            ExprKind::Difference(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                x.difference(&y, &mut self.circuit)
            }
            ExprKind::Join(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                x.join(&y, &mut self.circuit)
            }
            ExprKind::Product(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                x.product(&y, &mut self.circuit)
            }
            ExprKind::IfThenElse(c, a, b) => {
                let cond = self.formula(c)?;
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                BoolMatrix::ite(cond, &x, &y, &mut self.circuit)
            }
            ExprKind::Comprehension(decls, body) => {
                let mut out = BoolMatrix::empty(decls.len());
                self.comprehend(decls, body, &mut Vec::new(), Bit::TRUE, &mut out)?;
                out
            }
            ExprKind::Project(a, cols) => {
                let x = self.expr(a)?;
                let mut columns = Vec::with_capacity(cols.len());
                for c in cols {
                    let k = c.constant().ok_or(TranslateError::NonConstantColumn)?;
                    if k < 0 || k as usize >= x.arity() {
                        return Err(TranslateError::ColumnOutOfRange {
                            column: k,
                            arity: x.arity(),
                        });
                    }
                    columns.push(k as usize);
                }
                x.project(&columns, &mut self.circuit)
            }
            ExprKind::IntCast(i) => {
                let bits = self.int(i)?;
                let (lo, hi) = int_range(self.bitwidth);
                let mut m = BoolMatrix::empty(1);
                let ints: Vec<(i64, usize)> = self.bounds.ints().iter().map(|(&v, &a)| (v, a)).collect();
                for (v, atom) in ints {
                    if v < lo || v > hi {
                        continue;
                    }
                    let k = ints::constant(v, self.width());
                    let eq = ints::equal(&mut self.circuit, &bits, &k);
                    m.set(vec![atom], eq);
                }
                m
            }
        })
    }

    pub fn int(&mut self, i: &IntExpr) -> Result<IntBits, TranslateError> {
        let w = self.width();
        Ok(match &i.kind {
            IntExprKind::Literal(v) => {
                let (lo, hi) = int_range(self.bitwidth);
                if *v < lo || *v > hi {
                    return Err(TranslateError::IntOutOfRange(*v));
                }
                ints::constant(*v, w)
            }
            IntExprKind::Card(e) => {
                let m = self.expr(e)?;
                let bits: Vec<Bit> = m.cells().map(|(_, b)| b).collect();
                ints::count(&mut self.circuit, &bits, w)
            }
            IntExprKind::Sum(e) => {
                let m = self.expr(e)?;
                let values: HashMap<usize, i64> = self.bounds.ints().iter().map(|(&v, &a)| (a, v)).collect();
                let mut terms = Vec::new();
                for (t, member) in m.cells() {
                    if let Some(&v) = values.get(&t[0]) {
                        let k = ints::constant(v, w);
                        terms.push(k.into_iter().map(|b| self.circuit.and(b, member)).collect());
                    }
                }
                ints::sum(&mut self.circuit, terms, w)
            }
            IntExprKind::Arith(op, a, b) => {
                let (x, y) = (self.int(a)?, self.int(b)?);
                let c = &mut self.circuit;
                match op {
                    IntOp::Add => ints::add(c, &x, &y),
                    IntOp::Sub => ints::sub(c, &x, &y),
                    IntOp::Mul => ints::mul(c, &x, &y),
                    IntOp::Div => ints::div(c, &x, &y),
                }
            }
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct TranslationStats {
    pub num_vars: u32,
    pub num_clauses: usize,
    pub primary_vars: u32,
    pub translation_millis: u128,
}

/// CNF for a problem under bounds, with the maps needed to read solutions
/// and cores back.
#[derive(Clone, Debug)]
pub struct Translation {
    pub cnf: ClauseDb,
    pub varmap: VarMap,
    /// One assumption literal per constraint, in constraint order.
    pub selectors: IndexMap<ConstraintId, Lit>,
    pub stats: TranslationStats,
    bounds: Bounds,
    bitwidth: u32,
}

impl Translation {
    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn bitwidth(&self) -> u32 {
        self.bitwidth
    }

    pub fn selector(&self, id: ConstraintId) -> Option<Lit> {
        self.selectors.get(&id).copied()
    }

    pub fn constraint_of(&self, selector: Lit) -> Option<ConstraintId> {
        self.selectors.iter().find(|(_, &l)| l == selector).map(|(&id, _)| id)
    }
}

/// Tseitin conversion of circuit nodes reachable from the roots.
struct Tseitin<'c> {
    circuit: &'c Circuit,
    lits: HashMap<usize, Lit>,
}

impl Tseitin<'_> {
    /// The literal equivalent to `root`; None for constants.
    fn lit(&mut self, root: Bit, cnf: &mut ClauseDb) -> Option<Lit> {
        if root.is_const() {
            return None;
        }
        let mut stack = vec![root];
        while let Some(&bit) = stack.last() {
            let n = Circuit::node_index(bit);
            if self.lits.contains_key(&n) {
                stack.pop();
                continue;
            }
            match self.circuit.node(bit) {
                circuit::Node::True => unreachable!("constants are folded out of gates"),
                circuit::Node::Input(v) => {
                    self.lits.insert(n, Lit::pos(v));
                    stack.pop();
                }
                circuit::Node::And(a, b) => {
                    let na = Circuit::node_index(a);
                    let nb = Circuit::node_index(b);
                    match (self.lits.get(&na).copied(), self.lits.get(&nb).copied()) {
                        (Some(la), Some(lb)) => {
                            let la = if Circuit::is_negated(a) { !la } else { la };
                            let lb = if Circuit::is_negated(b) { !lb } else { lb };
                            let g = Lit::pos(cnf.new_var());
                            cnf.add_clause(&[!g, la]);
                            cnf.add_clause(&[!g, lb]);
                            cnf.add_clause(&[g, !la, !lb]);
                            self.lits.insert(n, g);
                            stack.pop();
                        }
                        (x, y) => {
                            if x.is_none() {
                                stack.push(a);
                            }
                            if y.is_none() {
                                stack.push(b);
                            }
                        }
                    }
                }
            }
        }
        let l = self.lits[&Circuit::node_index(root)];
        Some(if Circuit::is_negated(root) { !l } else { l })
    }
}

/// Translates every constraint of `problem` as `selector => encoding`.
pub fn translate(
    problem: &RelationalProblem,
    bounds: &Bounds,
    options: &TranslateOptions,
) -> Result<Translation, TranslateError> {
    let start = Instant::now();
    for r in &problem.relations {
        if !bounds.contains(r) {
            return Err(TranslateError::UnboundedRelation(r.name().to_string()));
        }
    }
    let varmap = VarMap::new(bounds);
    let mut cnf = ClauseDb::new();
    cnf.reserve_vars(varmap.num_primary());
    let mut selectors = IndexMap::new();
    for c in &problem.constraints {
        selectors.insert(c.id, Lit::pos(cnf.new_var()));
    }
    let mut encoder = Encoder::new(bounds, &varmap, options.bitwidth);
    let mut roots = Vec::with_capacity(problem.constraints.len());
    for c in &problem.constraints {
        c.formula.check()?;
        roots.push(encoder.formula(&c.formula)?);
    }
    let mut tseitin = Tseitin {
        circuit: &encoder.circuit,
        lits: HashMap::new(),
    };
    for (c, root) in problem.constraints.iter().zip(roots) {
        let sel = selectors[&c.id];
        match tseitin.lit(root, &mut cnf) {
            None if root == Bit::TRUE => {}
            None => cnf.add_clause(&[!sel]),
            Some(l) => cnf.add_clause(&[!sel, l]),
        }
    }
    let stats = TranslationStats {
        num_vars: cnf.num_vars(),
        num_clauses: cnf.num_clauses(),
        primary_vars: varmap.num_primary(),
        translation_millis: start.elapsed().as_millis(),
    };
    Ok(Translation {
        cnf,
        varmap,
        selectors,
        stats,
        bounds: bounds.clone(),
        bitwidth: options.bitwidth,
    })
}

/// Reads relation values out of a satisfying assignment.
pub fn interpret(translation: &Translation, assignment: &Assignment) -> Result<ConcreteInstance, TranslateError> {
    let needed = translation.varmap.num_primary();
    if assignment.num_vars() < needed {
        return Err(TranslateError::IncompleteAssignment {
            expected: needed,
            found: assignment.num_vars(),
        });
    }
    let bounds = &translation.bounds;
    let mut inst = ConcreteInstance::new(bounds.universe().clone(), translation.bitwidth);
    inst.set_ints(bounds.ints().clone());
    for (rel, lower, _) in bounds.entries() {
        let mut value: TupleSet = lower.clone();
        for (t, v) in translation.varmap.cells(rel) {
            if assignment.value(v) {
                value.insert(t.clone())?;
            }
        }
        inst.set(rel, value)?;
    }
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{Category, RelationKind, Universe};
    use crate::sat::{SatOutcome, Solver};

    fn setup(lower: &[&str], upper: &[&str]) -> (RelationalProblem, Bounds, Relation) {
        let u = Universe::new(["a", "b"]).unwrap();
        let r = Relation::new("r", 1, RelationKind::Class);
        let mut b = Bounds::new(u.clone());
        let l = TupleSet::from_names(&u, 1, lower.iter().map(|x| [*x])).unwrap();
        let h = TupleSet::from_names(&u, 1, upper.iter().map(|x| [*x])).unwrap();
        b.bound(&r, l, h).unwrap();
        let mut p = RelationalProblem::new();
        p.declare(r.clone());
        (p, b, r)
    }

    fn solve(p: &RelationalProblem, b: &Bounds) -> (Translation, SatOutcome) {
        let t = translate(p, b, &TranslateOptions::default()).unwrap();
        let mut s = Solver::from_db(&t.cnf);
        let sels: Vec<Lit> = t.selectors.values().copied().collect();
        let out = s.solve(&sels);
        (t, out)
    }

    #[test]
    fn exact_bound_contradiction() {
        let (mut p, b, r) = setup(&["a"], &["a"]);
        p.add("no r", Expr::rel(&r).no(), None, Category::Fact);
        let (t, out) = solve(&p, &b);
        assert_eq!(t.varmap.num_primary(), 0);
        assert!(!out.is_sat());
    }

    #[test]
    fn some_forces_a_tuple() {
        let (mut p, b, r) = setup(&[], &["a", "b"]);
        p.add("some r", Expr::rel(&r).some(), None, Category::Fact);
        let (t, out) = solve(&p, &b);
        let SatOutcome::Sat(m) = out else { panic!() };
        let inst = interpret(&t, &m).unwrap();
        assert!(!inst.get(&r).unwrap().is_empty());
    }

    #[test]
    fn interpret_extremes() {
        let (p, b, r) = setup(&["a"], &["a", "b"]);
        let t = translate(&p, &b, &TranslateOptions::default()).unwrap();
        let none = Assignment::from_values(vec![false; t.cnf.num_vars() as usize]);
        let all = Assignment::from_values(vec![true; t.cnf.num_vars() as usize]);
        assert_eq!(interpret(&t, &none).unwrap().get(&r), b.lower(&r));
        assert_eq!(interpret(&t, &all).unwrap().get(&r), b.upper(&r));
        let short = Assignment::from_values(vec![]);
        assert!(matches!(
            interpret(&t, &short),
            Err(TranslateError::IncompleteAssignment { .. })
        ));
    }

    #[test]
    fn unbounded_relation() {
        let (mut p, b, _) = setup(&[], &["a"]);
        let s = Relation::unary("s");
        p.add("some s", Expr::rel(&s).some(), None, Category::Fact);
        assert_eq!(
            translate(&p, &b, &TranslateOptions::default()).unwrap_err(),
            TranslateError::UnboundedRelation("s".into())
        );
    }

    #[test]
    fn self_loop_violates_acyclicity() {
        let u = Universe::new(["t0"]).unwrap();
        let cdr = Relation::binary("cdr");
        let list = Relation::unary("List");
        let mut b = Bounds::new(u.clone());
        b.bound_exactly(&list, TupleSet::univ(&u)).unwrap();
        let loop_ = TupleSet::from_names(&u, 2, [["t0", "t0"]]).unwrap();
        b.bound_exactly(&cdr, loop_).unwrap();
        let mut p = RelationalProblem::new();
        let acyclic = Formula::forall(
            vec![Decl::new("x", Expr::rel(&list))],
            Expr::var("x").in_(Expr::var("x").join(Expr::rel(&cdr).closure())).not(),
        );
        p.add("acyclic cdr", acyclic, None, Category::Qualifier);
        let (_, out) = solve(&p, &b);
        assert!(!out.is_sat());
    }
}
