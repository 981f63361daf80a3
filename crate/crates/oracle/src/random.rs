//! Random small relational problems for differential testing.

use metareason_core::kernel::{
    Bounds, Category, Decl, Expr, Formula, IntCmp, IntExpr, IntOp, Multiplicity, Relation, RelationalProblem, TupleSet,
    Universe,
};
use rand::seq::SliceRandom;
use rand::Rng;

/// Size limits for generated problems.
#[derive(Clone, Copy, Debug)]
pub struct Shape {
    pub max_atoms: usize,
    pub max_relations: usize,
    pub max_depth: u32,
    pub max_free: usize,
    pub max_constraints: usize,
    pub bitwidth: u32,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            max_atoms: 6,
            max_relations: 3,
            max_depth: 4,
            max_free: 12,
            max_constraints: 3,
            bitwidth: 4,
        }
    }
}

pub struct RandomProblem {
    pub problem: RelationalProblem,
    pub bounds: Bounds,
    pub bitwidth: u32,
}

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    relations: Vec<Relation>,
    vars: Vec<String>,
    fresh: usize,
    max_card: i64,
}

impl<R: Rng> Gen<'_, R> {
    fn leaf(&mut self, arity: usize) -> Expr {
        let rels: Vec<&Relation> = self.relations.iter().filter(|r| r.arity() == arity).collect();
        let roll = self.rng.gen_range(0..10);
        if arity == 1 && !self.vars.is_empty() && roll < 3 {
            return Expr::var(self.vars.choose(self.rng).unwrap().as_str());
        }
        if let Some(r) = rels.choose(self.rng).filter(|_| roll < 9) {
            return Expr::rel(r);
        }
        match arity {
            1 => Expr::univ(),
            _ => Expr::univ().product(Expr::univ()),
        }
    }

    fn expr(&mut self, depth: u32, arity: usize) -> Expr {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.leaf(arity);
        }
        let d = depth - 1;
        match (arity, self.rng.gen_range(0..10)) {
            (_, 0) => self.expr(d, arity).union(self.expr(d, arity)),
            (_, 1) => self.expr(d, arity).intersection(self.expr(d, arity)),
            (_, 2) => self.expr(d, arity).difference(self.expr(d, arity)),
            (_, 3) => {
                let c = self.formula(d);
                Expr::ite(c, self.expr(d, arity), self.expr(d, arity))
            }
            (1, 4) => self.expr(d, 1).join(self.expr(d, 2)),
            (1, 5) => self.expr(d, 2).join(self.expr(d, 1)),
            (1, 6) => {
                let col = self.rng.gen_range(0..2);
                self.expr(d, 2).project(vec![IntExpr::literal(col)])
            }
            (1, _) => {
                let domain = self.expr(d, 1);
                let v = self.bind();
                let body = self.formula(d);
                self.vars.pop();
                Expr::comprehension(vec![Decl::new(v.as_str(), domain)], body)
            }
            (2, 4) => self.expr(d, 2).transpose(),
            (2, 5) => self.expr(d, 2).closure(),
            (2, 6) => self.expr(d, 1).product(self.expr(d, 1)),
            (2, 7) => self.expr(d, 2).join(self.expr(d, 2)),
            (2, _) => {
                let da = self.expr(d, 1);
                let a = self.bind();
                let db = self.expr(d, 1);
                let b = self.bind();
                let body = self.formula(d);
                self.vars.pop();
                self.vars.pop();
                Expr::comprehension(vec![Decl::new(a.as_str(), da), Decl::new(b.as_str(), db)], body)
            }
            _ => unreachable!("arity is 1 or 2"),
        }
    }

    fn bind(&mut self) -> String {
        let v = format!("v{}", self.fresh);
        self.fresh += 1;
        self.vars.push(v.clone());
        v
    }

    fn int(&mut self, depth: u32) -> IntExpr {
        if depth == 0 || self.rng.gen_bool(0.5) {
            if self.rng.gen_bool(0.5) {
                let arity = self.rng.gen_range(1..=2);
                return self.expr(depth.saturating_sub(1), arity).count();
            }
            return IntExpr::literal(self.rng.gen_range(-2..=self.max_card.min(7)));
        }
        let op = *[IntOp::Add, IntOp::Sub, IntOp::Mul, IntOp::Add]
            .choose(self.rng)
            .unwrap();
        IntExpr::arith(op, self.int(depth - 1), self.int(depth - 1))
    }

    fn formula(&mut self, depth: u32) -> Formula {
        let d = depth.saturating_sub(1);
        let roll = if depth == 0 {
            self.rng.gen_range(0..4)
        } else {
            self.rng.gen_range(0..11)
        };
        match roll {
            0 => {
                let a = self.rng.gen_range(1..=2);
                self.expr(d, a).in_(self.expr(d, a))
            }
            1 => {
                let a = self.rng.gen_range(1..=2);
                self.expr(d, a).eq(self.expr(d, a))
            }
            2 => {
                let m = *[
                    Multiplicity::Some,
                    Multiplicity::One,
                    Multiplicity::Lone,
                    Multiplicity::No,
                ]
                .choose(self.rng)
                .unwrap();
                let a = self.rng.gen_range(1..=2);
                Formula::mult(m, self.expr(d, a))
            }
            3 => {
                let op = *[IntCmp::Eq, IntCmp::Lt, IntCmp::Gt].choose(self.rng).unwrap();
                Formula::compare(op, self.int(d.min(1)), self.int(d.min(1)))
            }
            4 => self.formula(d).not(),
            5 => self.formula(d).and(self.formula(d)),
            6 => self.formula(d).or(self.formula(d)),
            7 => self.formula(d).implies(self.formula(d)),
            _ => {
                let domain = self.expr(d, 1);
                let v = self.bind();
                let body = self.formula(d);
                self.vars.pop();
                let decls = vec![Decl::new(v.as_str(), domain)];
                if roll % 2 == 0 {
                    Formula::forall(decls, body)
                } else {
                    Formula::exists(decls, body)
                }
            }
        }
    }
}

/// A random problem over at most `shape.max_atoms` atoms with at most
/// `shape.max_free` free tuples in total.
pub fn random_problem(rng: &mut impl Rng, shape: &Shape) -> RandomProblem {
    let n = rng.gen_range(1..=shape.max_atoms);
    let universe = Universe::new((0..n).map(|i| format!("a{i}"))).expect("distinct atoms");
    let mut bounds = Bounds::new(universe.clone());
    let mut problem = RelationalProblem::new();
    let mut relations = Vec::new();
    let mut free = 0;
    for i in 0..rng.gen_range(1..=shape.max_relations) {
        let arity = rng.gen_range(1..=2);
        let r = if arity == 1 {
            Relation::unary(format!("r{i}"))
        } else {
            Relation::binary(format!("r{i}"))
        };
        let mut lower = TupleSet::empty(&universe, arity);
        let mut upper = TupleSet::empty(&universe, arity);
        let all: Vec<Vec<usize>> = if arity == 1 {
            (0..n).map(|a| vec![a]).collect()
        } else {
            (0..n).flat_map(|a| (0..n).map(move |b| vec![a, b])).collect()
        };
        for t in all {
            let roll = rng.gen_range(0..20);
            if roll < 3 {
                lower.insert(t.clone()).expect("in universe");
                upper.insert(t).expect("in universe");
            } else if roll < 12 && free < shape.max_free {
                upper.insert(t).expect("in universe");
                free += 1;
            }
        }
        bounds.bound(&r, lower, upper).expect("lower within upper");
        problem.declare(r.clone());
        relations.push(r);
    }
    let mut g = Gen {
        rng,
        relations,
        vars: Vec::new(),
        fresh: 0,
        max_card: (n * n) as i64,
    };
    let k = g.rng.gen_range(1..=shape.max_constraints);
    for i in 0..k {
        let f = g.formula(shape.max_depth);
        problem.add(format!("f{i}"), f, None, Category::Fact);
    }
    RandomProblem {
        problem,
        bounds,
        bitwidth: shape.bitwidth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generated_formulas_are_well_formed() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..200 {
            let p = random_problem(&mut rng, &Shape::default());
            for c in &p.problem.constraints {
                c.formula.check().unwrap();
            }
            assert!(crate::brute::free_tuples(&p.bounds) <= 12);
        }
    }
}
