//! Exhaustive model enumeration over the free tuples of a bounded problem.
//!
//! Every candidate is checked with the kernel evaluator. Search is pruned by
//! a three-valued evaluation over (lower, upper) approximations of the
//! partially decided relations, which can only return a definite answer when
//! every completion agrees.

use std::collections::{BTreeSet, HashMap};

use metareason_core::kernel::{
    holds, visit_relations, wrap, Bounds, ConcreteInstance, Decl, Expr, ExprKind, Formula, FormulaKind, IntCmp,
    IntExpr, IntExprKind, IntOp, KernelError, Multiplicity, Relation, RelationalProblem, Tuple, TupleSet,
};

type Set = BTreeSet<Tuple>;

/// Lower and upper approximation of a relational value.
#[derive(Clone, Debug)]
struct Approx {
    lo: Set,
    hi: Set,
}

impl Approx {
    fn exact(s: Set) -> Self {
        Approx { lo: s.clone(), hi: s }
    }
}

fn join(a: &Set, b: &Set) -> Set {
    let mut out = Set::new();
    for x in a {
        for y in b {
            if x.last() == y.first() {
                out.insert(x[..x.len() - 1].iter().chain(&y[1..]).copied().collect());
            }
        }
    }
    out
}

fn product(a: &Set, b: &Set) -> Set {
    let mut out = Set::new();
    for x in a {
        for y in b {
            out.insert(x.iter().chain(y).copied().collect());
        }
    }
    out
}

fn closure(a: &Set) -> Set {
    let mut acc = a.clone();
    loop {
        let step = join(&acc, a);
        let before = acc.len();
        acc.extend(step);
        if acc.len() == before {
            return acc;
        }
    }
}

fn transpose(a: &Set) -> Set {
    a.iter().map(|t| t.iter().rev().copied().collect()).collect()
}

fn and3(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    match (a, b) {
        (Some(false), _) | (_, Some(false)) => Some(false),
        (Some(true), Some(true)) => Some(true),
        _ => None,
    }
}

fn not3(a: Option<bool>) -> Option<bool> {
    a.map(|b| !b)
}

fn or3(a: Option<bool>, b: Option<bool>) -> Option<bool> {
    not3(and3(not3(a), not3(b)))
}

struct Partial<'a> {
    values: &'a HashMap<Relation, Approx>,
    ints: &'a HashMap<usize, i64>,
    atom_of: &'a HashMap<i64, usize>,
    n: usize,
    bitwidth: u32,
    env: Vec<(String, usize)>,
}

impl Partial<'_> {
    fn lookup(&self, name: &str) -> Option<usize> {
        self.env.iter().rev().find(|(v, _)| v == name).map(|&(_, a)| a)
    }

    fn formula(&mut self, f: &Formula) -> Option<bool> {
        match &f.kind {
            FormulaKind::Subset(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                subset3(&x, &y)
            }
            FormulaKind::Equal(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                and3(subset3(&x, &y), subset3(&y, &x))
            }
            FormulaKind::Mult(m, e) => {
                let x = self.expr(e)?;
                let (lo, hi) = (x.lo.len(), x.hi.len());
                match m {
                    Multiplicity::Some if lo > 0 => Some(true),
                    Multiplicity::Some if hi == 0 => Some(false),
                    Multiplicity::No if lo > 0 => Some(false),
                    Multiplicity::No if hi == 0 => Some(true),
                    Multiplicity::Lone if lo > 1 => Some(false),
                    Multiplicity::Lone if hi <= 1 => Some(true),
                    Multiplicity::One if lo > 1 || hi == 0 => Some(false),
                    Multiplicity::One if lo == 1 && hi == 1 => Some(true),
                    _ => None,
                }
            }
            FormulaKind::Not(g) => not3(self.formula(g)),
            FormulaKind::And(a, b) => {
                let x = self.formula(a);
                if x == Some(false) {
                    return x;
                }
                and3(x, self.formula(b))
            }
            FormulaKind::Or(a, b) => {
                let x = self.formula(a);
                if x == Some(true) {
                    return x;
                }
                or3(x, self.formula(b))
            }
            FormulaKind::Implies(a, b) => {
                let x = self.formula(a);
                if x == Some(false) {
                    return Some(true);
                }
                or3(not3(x), self.formula(b))
            }
            FormulaKind::Forall(decls, body) => self.quantify(decls, body, true),
            FormulaKind::Exists(decls, body) => self.quantify(decls, body, false),
            FormulaKind::IntCompare(op, a, b) => {
                let ((a0, a1), (b0, b1)) = (self.int(a)?, self.int(b)?);
                match op {
                    IntCmp::Eq if a0 == a1 && b0 == b1 => Some(a0 == b0),
                    IntCmp::Eq if a1 < b0 || b1 < a0 => Some(false),
                    IntCmp::Lt if a1 < b0 => Some(true),
                    IntCmp::Lt if a0 >= b1 => Some(false),
                    IntCmp::Gt if a0 > b1 => Some(true),
                    IntCmp::Gt if a1 <= b0 => Some(false),
                    _ => None,
                }
            }
        }
    }

    fn quantify(&mut self, decls: &[Decl], body: &Formula, universal: bool) -> Option<bool> {
        let Some((first, rest)) = decls.split_first() else {
            return self.formula(body);
        };
        let domain = self.expr(&first.expr)?;
        // Start from the identity of the connective and fold each member in.
        let mut acc = Some(universal);
        for t in &domain.hi {
            self.env.push((first.var.name().to_string(), t[0]));
            let v = self.quantify(rest, body, universal);
            self.env.pop();
            let certain = domain.lo.contains(t);
            let contribution = match (certain, v) {
                (true, v) => v,
                (false, Some(b)) if b == universal => Some(universal),
                (false, _) => None,
            };
            acc = if universal {
                and3(acc, contribution)
            } else {
                or3(acc, contribution)
            };
            if acc == Some(!universal) {
                break;
            }
        }
        acc
    }

    fn expr(&mut self, e: &Expr) -> Option<Approx> {
        Some(match &e.kind {
            ExprKind::Var(v) => Approx::exact(BTreeSet::from([vec![self.lookup(v.name())?]])),
            ExprKind::Rel(r) => self.values.get(r)?.clone(),
            ExprKind::Univ => Approx::exact((0..self.n).map(|a| vec![a]).collect()),
            ExprKind::Transpose(a) => {
                let x = self.expr(a)?;
                Approx {
                    lo: transpose(&x.lo),
                    hi: transpose(&x.hi),
                }
            }
            ExprKind::Closure(a) => {
                let x = self.expr(a)?;
                Approx {
                    lo: closure(&x.lo),
                    hi: closure(&x.hi),
                }
            }
            ExprKind::Union(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                Approx {
                    lo: &x.lo | &y.lo,
                    hi: &x.hi | &y.hi,
                }
            }
            ExprKind::Intersection(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                Approx {
                    lo: &x.lo & &y.lo,
                    hi: &x.hi & &y.hi,
                }
            }
            ExprKind::Difference(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                Approx {
                    lo: &x.lo - &y.hi,
                    hi: &x.hi - &y.lo,
                }
            }
            ExprKind::Join(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                Approx {
                    lo: join(&x.lo, &y.lo),
                    hi: join(&x.hi, &y.hi),
                }
            }
            ExprKind::Product(a, b) => {
                let (x, y) = (self.expr(a)?, self.expr(b)?);
                Approx {
                    lo: product(&x.lo, &y.lo),
                    hi: product(&x.hi, &y.hi),
                }
            }
            ExprKind::IfThenElse(c, a, b) => match self.formula(c) {
                Some(true) => self.expr(a)?,
                Some(false) => self.expr(b)?,
                None => {
                    let (x, y) = (self.expr(a)?, self.expr(b)?);
                    Approx {
                        lo: &x.lo & &y.lo,
                        hi: &x.hi | &y.hi,
                    }
                }
            },
            ExprKind::Comprehension(decls, body) => {
                let mut out = Approx {
                    lo: Set::new(),
                    hi: Set::new(),
                };
                self.comprehend(decls, body, &mut Vec::new(), true, &mut out)?;
                out
            }
            ExprKind::Project(a, cols) => {
                let x = self.expr(a)?;
                let cols: Vec<usize> = cols
                    .iter()
                    .map(|c| c.constant().map(|k| k as usize))
                    .collect::<Option<_>>()?;
                let pick = |s: &Set| -> Set { s.iter().map(|t| cols.iter().map(|&c| t[c]).collect()).collect() };
                Approx {
                    lo: pick(&x.lo),
                    hi: pick(&x.hi),
                }
            }
            ExprKind::IntCast(i) => match self.int(i) {
                Some((v, w)) if v == w => Approx::exact(self.atom_of.get(&v).map(|&a| vec![a]).into_iter().collect()),
                _ => Approx {
                    lo: Set::new(),
                    hi: self.ints.keys().map(|&a| vec![a]).collect(),
                },
            },
        })
    }

    fn comprehend(
        &mut self,
        decls: &[Decl],
        body: &Formula,
        prefix: &mut Vec<usize>,
        certain: bool,
        out: &mut Approx,
    ) -> Option<()> {
        let Some((first, rest)) = decls.split_first() else {
            match self.formula(body) {
                Some(false) => {}
                Some(true) if certain => {
                    out.lo.insert(prefix.clone());
                    out.hi.insert(prefix.clone());
                }
                _ => {
                    out.hi.insert(prefix.clone());
                }
            }
            return Some(());
        };
        let domain = self.expr(&first.expr)?;
        for t in &domain.hi {
            self.env.push((first.var.name().to_string(), t[0]));
            prefix.push(t[0]);
            let r = self.comprehend(rest, body, prefix, certain && domain.lo.contains(t), out);
            prefix.pop();
            self.env.pop();
            r?;
        }
        Some(())
    }

    /// An inclusive interval containing every possible value.
    fn int(&mut self, i: &IntExpr) -> Option<(i64, i64)> {
        let (min, max) = (-(1i64 << (self.bitwidth - 1)), (1i64 << (self.bitwidth - 1)) - 1);
        match &i.kind {
            IntExprKind::Literal(v) => Some((*v, *v)),
            IntExprKind::Card(e) => {
                let x = self.expr(e)?;
                let (lo, hi) = (x.lo.len() as i64, x.hi.len() as i64);
                if lo == hi {
                    let w = wrap(lo as i128, self.bitwidth);
                    Some((w, w))
                } else if hi <= max {
                    Some((lo, hi))
                } else {
                    None
                }
            }
            IntExprKind::Sum(e) => {
                let x = self.expr(e)?;
                if x.lo != x.hi {
                    return None;
                }
                let total: i128 =
                    x.lo.iter()
                        .filter_map(|t| self.ints.get(&t[0]))
                        .map(|&v| v as i128)
                        .sum();
                let w = wrap(total, self.bitwidth);
                Some((w, w))
            }
            IntExprKind::Arith(op, a, b) => {
                let ((a0, a1), (b0, b1)) = (self.int(a)?, self.int(b)?);
                if a0 == a1 && b0 == b1 {
                    let (x, y) = (a0 as i128, b0 as i128);
                    let v = match op {
                        IntOp::Add => x + y,
                        IntOp::Sub => x - y,
                        IntOp::Mul => x * y,
                        IntOp::Div if y == 0 => return None,
                        IntOp::Div => x / y,
                    };
                    let w = wrap(v, self.bitwidth);
                    return Some((w, w));
                }
                let (lo, hi) = match op {
                    IntOp::Add => (a0 + b0, a1 + b1),
                    IntOp::Sub => (a0 - b1, a1 - b0),
                    _ => return None,
                };
                (lo >= min && hi <= max).then_some((lo, hi))
            }
        }
    }
}

fn subset3(x: &Approx, y: &Approx) -> Option<bool> {
    if !x.lo.is_subset(&y.hi) {
        Some(false)
    } else if x.hi.is_subset(&y.lo) {
        Some(true)
    } else {
        None
    }
}

/// Controls how candidates are explored.
#[derive(Clone, Copy, Debug)]
pub struct SearchOptions {
    /// Use the three-valued evaluator to cut off dead branches.
    pub prune: bool,
    /// Stop after this many models.
    pub limit: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            prune: true,
            limit: usize::MAX,
        }
    }
}

struct Search<'a> {
    problem: &'a RelationalProblem,
    bounds: &'a Bounds,
    bitwidth: u32,
    options: SearchOptions,
    values: HashMap<Relation, Approx>,
    ints: HashMap<usize, i64>,
    atom_of: HashMap<i64, usize>,
    cells: Vec<(Relation, Tuple)>,
    /// Constraints to re-check after deciding a cell of each relation.
    watch: HashMap<Relation, Vec<usize>>,
    found: Vec<ConcreteInstance>,
}

impl Search<'_> {
    fn refuted(&self, constraints: &[usize]) -> bool {
        constraints.iter().any(|&c| {
            let mut p = Partial {
                values: &self.values,
                ints: &self.ints,
                atom_of: &self.atom_of,
                n: self.bounds.universe().size(),
                bitwidth: self.bitwidth,
                env: Vec::new(),
            };
            p.formula(&self.problem.constraints[c].formula) == Some(false)
        })
    }

    fn leaf(&mut self) -> Result<(), KernelError> {
        let universe = self.bounds.universe();
        let mut inst = ConcreteInstance::new(universe.clone(), self.bitwidth);
        for r in self.bounds.relations() {
            let v = &self.values[r];
            debug_assert_eq!(v.lo, v.hi);
            inst.set(r, TupleSet::from_tuples(universe, r.arity(), v.lo.iter().cloned())?)?;
        }
        inst.set_ints(self.bounds.ints().clone());
        for c in &self.problem.constraints {
            if !holds(&inst, &c.formula)? {
                return Ok(());
            }
        }
        self.found.push(inst);
        Ok(())
    }

    fn go(&mut self, k: usize) -> Result<(), KernelError> {
        if self.found.len() >= self.options.limit {
            return Ok(());
        }
        if k == self.cells.len() {
            return self.leaf();
        }
        let (r, t) = self.cells[k].clone();
        for include in [true, false] {
            let v = self.values.get_mut(&r).expect("bounded relation");
            if include {
                v.lo.insert(t.clone());
            } else {
                v.hi.remove(&t);
            }
            let dead = self.options.prune && self.refuted(&self.watch[&r]);
            if !dead {
                self.go(k + 1)?;
            }
            let v = self.values.get_mut(&r).expect("bounded relation");
            if include {
                v.lo.remove(&t);
            } else {
                v.hi.insert(t.clone());
            }
        }
        Ok(())
    }
}

/// Orders relations so that constraints become fully decided as early as
/// possible: repeatedly take the relation that closes the most constraints,
/// preferring fewer free tuples.
fn decision_order(bounds: &Bounds, mentions: &[BTreeSet<Relation>]) -> Vec<Relation> {
    let free: HashMap<Relation, usize> = bounds
        .entries()
        .map(|(r, lo, hi)| (r.clone(), hi.len() - lo.len()))
        .collect();
    let mut pending: Vec<Relation> = bounds.relations().filter(|r| free[*r] > 0).cloned().collect();
    let mut decided: BTreeSet<Relation> = bounds.relations().filter(|r| free[*r] == 0).cloned().collect();
    let mut order = Vec::new();
    while !pending.is_empty() {
        let score = |r: &Relation| {
            let closes = mentions
                .iter()
                .filter(|m| m.contains(r) && m.iter().all(|s| s == r || decided.contains(s)))
                .count();
            (std::cmp::Reverse(closes), free[r])
        };
        let (i, _) = pending
            .iter()
            .enumerate()
            .min_by_key(|(_, r)| score(r))
            .expect("non-empty");
        let r = pending.remove(i);
        decided.insert(r.clone());
        order.push(r);
    }
    order
}

/// All models of `problem` within `bounds`, each checked by the kernel
/// evaluator.
pub fn enumerate(
    problem: &RelationalProblem,
    bounds: &Bounds,
    bitwidth: u32,
    options: SearchOptions,
) -> Result<Vec<ConcreteInstance>, KernelError> {
    let mentions: Vec<BTreeSet<Relation>> = problem
        .constraints
        .iter()
        .map(|c| {
            let mut m = BTreeSet::new();
            visit_relations(&c.formula, &mut |r| {
                m.insert(r.clone());
            });
            m
        })
        .collect();
    let mut watch: HashMap<Relation, Vec<usize>> = HashMap::new();
    for r in bounds.relations() {
        let list = (0..mentions.len()).filter(|&i| mentions[i].contains(r)).collect();
        watch.insert(r.clone(), list);
    }
    let mut values = HashMap::new();
    for (r, lo, hi) in bounds.entries() {
        values.insert(
            r.clone(),
            Approx {
                lo: lo.tuples().clone(),
                hi: hi.tuples().clone(),
            },
        );
    }
    let mut cells = Vec::new();
    for r in decision_order(bounds, &mentions) {
        let (lo, hi) = bounds.get(&r).expect("bounded");
        cells.extend(hi.iter().filter(|t| !lo.contains(t)).map(|t| (r.clone(), t.clone())));
    }
    let ints: HashMap<usize, i64> = bounds.ints().iter().map(|(&v, &a)| (a, v)).collect();
    let atom_of: HashMap<i64, usize> = bounds.ints().iter().map(|(&v, &a)| (v, a)).collect();
    let mut search = Search {
        problem,
        bounds,
        bitwidth,
        options,
        values,
        ints,
        atom_of,
        cells,
        watch,
        found: Vec::new(),
    };
    let all: Vec<usize> = (0..problem.constraints.len()).collect();
    if !(options.prune && search.refuted(&all)) {
        search.go(0)?;
    }
    Ok(search.found)
}

/// Number of models.
pub fn count(problem: &RelationalProblem, bounds: &Bounds, bitwidth: u32) -> Result<usize, KernelError> {
    Ok(enumerate(problem, bounds, bitwidth, SearchOptions::default())?.len())
}

/// Whether any model exists.
pub fn satisfiable(problem: &RelationalProblem, bounds: &Bounds, bitwidth: u32) -> Result<bool, KernelError> {
    let opts = SearchOptions { prune: true, limit: 1 };
    Ok(!enumerate(problem, bounds, bitwidth, opts)?.is_empty())
}

/// Number of free tuples, i.e. the log2 of the naive search space.
pub fn free_tuples(bounds: &Bounds) -> usize {
    bounds.entries().map(|(_, lo, hi)| hi.len() - lo.len()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use metareason_core::kernel::{Category, Universe};

    #[test]
    fn counts_acyclic_relations_on_two_atoms() {
        let u = Universe::new(["a", "b"]).unwrap();
        let r = Relation::binary("r");
        let mut b = Bounds::new(u.clone());
        b.bound(
            &r,
            TupleSet::empty(&u, 2),
            TupleSet::univ(&u).product(&TupleSet::univ(&u)),
        )
        .unwrap();
        let mut p = RelationalProblem::new();
        p.declare(r.clone());
        let x = Expr::var("x");
        let f = Formula::forall(
            vec![Decl::new("x", Expr::univ())],
            x.clone().in_(x.join(Expr::rel(&r).closure())).not(),
        );
        p.add("acyclic r", f, None, Category::Qualifier);
        // Empty, a->b, b->a.
        assert_eq!(count(&p, &b, 4).unwrap(), 3);
        let slow = enumerate(
            &p,
            &b,
            4,
            SearchOptions {
                prune: false,
                limit: usize::MAX,
            },
        )
        .unwrap();
        assert_eq!(slow.len(), 3);
    }
}
