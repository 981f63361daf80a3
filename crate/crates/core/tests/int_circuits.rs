//! Exhaustive check of the encoded integer operators at bitwidth 4: every
//! pair of operands is enumerated through the SAT solver and compared with
//! wide-integer wraparound arithmetic.

#![allow(clippy::type_complexity)]

use std::collections::BTreeSet;

use metareason_core::kernel::{
    Bounds, Category, Expr, Formula, IntCmp, IntExpr, IntOp, Relation, RelationalProblem, TupleSet, Universe,
};
use metareason_core::sat::{SatOutcome, Solver};
use metareason_core::translate::{interpret, translate, TranslateOptions};
use metareason_oracle::ints;

const W: u32 = 4;

struct Setup {
    problem: RelationalProblem,
    bounds: Bounds,
    a: Relation,
    b: Relation,
    c: Relation,
}

fn setup() -> Setup {
    let values: Vec<i64> = ints::range(W).collect();
    let u = Universe::new(values.iter().map(|v| v.to_string())).unwrap();
    let mut bounds = Bounds::new(u.clone());
    for (i, &v) in values.iter().enumerate() {
        bounds.bind_int(v, i).unwrap();
    }
    let mut problem = RelationalProblem::new();
    let [a, b, c] = ["A", "B", "C"].map(Relation::unary);
    for r in [&a, &b, &c] {
        bounds.bound(r, TupleSet::empty(&u, 1), TupleSet::univ(&u)).unwrap();
        problem.declare(r.clone());
        problem.add(format!("one {r}"), Expr::rel(r).one(), None, Category::Structure);
    }
    Setup {
        problem,
        bounds,
        a,
        b,
        c,
    }
}

fn value(inst: &metareason_core::kernel::ConcreteInstance, r: &Relation) -> i64 {
    let set = inst.get(r).unwrap();
    let atom = set.iter().next().unwrap()[0];
    inst.int_value(atom).unwrap()
}

/// All (a, b, c) triples satisfying the extra constraint.
fn solutions(mut s: Setup, f: Formula) -> BTreeSet<(i64, i64, i64)> {
    s.problem.add("op", f, None, Category::Fact);
    let t = translate(&s.problem, &s.bounds, &TranslateOptions { bitwidth: W }).unwrap();
    let mut solver = Solver::from_db(&t.cnf);
    let assumptions: Vec<_> = t.selectors.values().copied().collect();
    let proj = t.varmap.primary_vars();
    let mut out = BTreeSet::new();
    while let SatOutcome::Sat(m) = solver.next_model(&proj, &assumptions) {
        let inst = interpret(&t, &m).unwrap();
        assert!(out.insert((value(&inst, &s.a), value(&inst, &s.b), value(&inst, &s.c))));
    }
    out
}

#[test]
fn arithmetic_matches_wraparound() {
    let ops: [(IntOp, fn(i64, i64) -> Option<i64>); 4] = [
        (IntOp::Add, |a, b| Some(ints::add(a, b, W))),
        (IntOp::Sub, |a, b| Some(ints::sub(a, b, W))),
        (IntOp::Mul, |a, b| Some(ints::mul(a, b, W))),
        (IntOp::Div, |a, b| ints::div(a, b, W)),
    ];
    for (op, oracle) in ops {
        let s = setup();
        let (a, b, c) = (Expr::rel(&s.a).sum(), Expr::rel(&s.b).sum(), Expr::rel(&s.c).sum());
        let mut f = IntExpr::arith(op, a, b.clone()).eq(c);
        if op == IntOp::Div {
            f = IntExpr::literal(0).eq(b).not().and(f);
        }
        let got = solutions(s, f);
        let mut want = BTreeSet::new();
        for x in ints::range(W) {
            for y in ints::range(W) {
                if let Some(z) = oracle(x, y) {
                    want.insert((x, y, z));
                }
            }
        }
        assert_eq!(got, want, "{op:?}");
    }
}

#[test]
fn comparisons_match() {
    let cmps: [(IntCmp, fn(i64, i64) -> bool); 3] = [
        (IntCmp::Lt, |a, b| a < b),
        (IntCmp::Gt, |a, b| a > b),
        (IntCmp::Eq, |a, b| a == b),
    ];
    for (op, oracle) in cmps {
        let s = setup();
        let (a, b, c) = (Expr::rel(&s.a).sum(), Expr::rel(&s.b).sum(), Expr::rel(&s.c).sum());
        // Pin C so each (a, b) pair is one model.
        let f = Formula::compare(op, a, b).and(c.eq(IntExpr::literal(0)));
        let got = solutions(s, f);
        let want: BTreeSet<_> = ints::range(W)
            .flat_map(|x| ints::range(W).map(move |y| (x, y)))
            .filter(|&(x, y)| oracle(x, y))
            .map(|(x, y)| (x, y, 0))
            .collect();
        assert_eq!(got, want, "{op:?}");
    }
}

#[test]
fn cardinality_wraps() {
    let s = setup();
    // #A where A is any set of int atoms: 16 atoms at width 4 wraps to 0.
    let mut p = RelationalProblem::new();
    let u = s.bounds.universe().clone();
    let mut bounds = s.bounds.clone();
    let r = Relation::unary("R");
    bounds.bound(&r, TupleSet::univ(&u), TupleSet::univ(&u)).unwrap();
    p.declare(r.clone());
    p.add(
        "wrap",
        Expr::rel(&r).count().eq(IntExpr::literal(0)),
        None,
        Category::Fact,
    );
    for x in [&s.a, &s.b, &s.c] {
        p.declare(x.clone());
    }
    let t = translate(&p, &bounds, &TranslateOptions { bitwidth: W }).unwrap();
    let mut solver = Solver::from_db(&t.cnf);
    let assumptions: Vec<_> = t.selectors.values().copied().collect();
    assert!(solver.solve(&assumptions).is_sat());
}
