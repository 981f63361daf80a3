use std::collections::BTreeSet;

use metareason_core::kernel::{holds, ConcreteInstance, Expr, Relation, TupleSet, Universe};
use metareason_oracle::graph;
use proptest::prelude::*;

const N: usize = 4;

fn universe() -> Universe {
    Universe::new((0..N).map(|i| format!("a{i}"))).unwrap()
}

fn binary() -> impl Strategy<Value = BTreeSet<(usize, usize)>> {
    proptest::collection::btree_set((0..N, 0..N), 0..=N * N)
}

fn unary() -> impl Strategy<Value = BTreeSet<usize>> {
    proptest::collection::btree_set(0..N, 0..=N)
}

fn set2(u: &Universe, s: &BTreeSet<(usize, usize)>) -> TupleSet {
    TupleSet::from_tuples(u, 2, s.iter().map(|&(a, b)| vec![a, b])).unwrap()
}

fn set1(u: &Universe, s: &BTreeSet<usize>) -> TupleSet {
    TupleSet::from_tuples(u, 1, s.iter().map(|&a| vec![a])).unwrap()
}

proptest! {
    #[test]
    fn set_operators_obey_boolean_algebra(a in binary(), b in binary(), c in binary()) {
        let u = universe();
        let (x, y, z) = (set2(&u, &a), set2(&u, &b), set2(&u, &c));
        prop_assert_eq!(x.union(&y), y.union(&x));
        prop_assert_eq!(x.union(&y.union(&z)), x.union(&y).union(&z));
        prop_assert_eq!(x.intersection(&y.union(&z)), x.intersection(&y).union(&x.intersection(&z)));
        prop_assert_eq!(x.difference(&y.union(&z)), x.difference(&y).intersection(&x.difference(&z)));
        prop_assert!(x.intersection(&y).is_subset(&x));
    }

    #[test]
    fn join_is_associative_and_transpose_reverses_it(a in binary(), b in binary(), c in binary()) {
        let u = universe();
        let (x, y, z) = (set2(&u, &a), set2(&u, &b), set2(&u, &c));
        prop_assert_eq!(x.join(&y).join(&z), x.join(&y.join(&z)));
        prop_assert_eq!(x.transpose().transpose(), x.clone());
        prop_assert_eq!(x.join(&y).transpose(), y.transpose().join(&x.transpose()));
    }

    #[test]
    fn closure_matches_floyd_warshall(a in binary()) {
        let u = universe();
        let x = set2(&u, &a);
        prop_assert_eq!(x.closure(), set2(&u, &graph::closure(N, &a)));
        prop_assert_eq!(x.closure().closure(), x.closure());
    }

    #[test]
    fn product_then_projection_recovers_factors(a in unary(), b in unary()) {
        let u = universe();
        let (x, y) = (set1(&u, &a), set1(&u, &b));
        let p = x.product(&y);
        prop_assert_eq!(p.len(), a.len() * b.len());
        if !b.is_empty() {
            prop_assert_eq!(p.project(&[0]), x.clone());
        }
        if !a.is_empty() {
            prop_assert_eq!(p.project(&[1]), y);
        }
    }

    #[test]
    fn evaluator_agrees_with_set_operations(a in binary(), b in binary(), s in unary()) {
        let u = universe();
        let (r, q, v) = (Relation::binary("r"), Relation::binary("q"), Relation::unary("s"));
        let mut inst = ConcreteInstance::new(u.clone(), 4);
        inst.set(&r, set2(&u, &a)).unwrap();
        inst.set(&q, set2(&u, &b)).unwrap();
        inst.set(&v, set1(&u, &s)).unwrap();
        let (er, eq, es) = (Expr::rel(&r), Expr::rel(&q), Expr::rel(&v));
        prop_assert_eq!(holds(&inst, &er.clone().in_(eq.clone())).unwrap(), a.is_subset(&b));
        let image: BTreeSet<usize> = a.iter().filter(|(x, _)| s.contains(x)).map(|&(_, y)| y).collect();
        prop_assert_eq!(holds(&inst, &es.clone().join(er.clone()).eq(es.clone())).unwrap(), image == s);
        let c = holds(&inst, &es.join(er.closure()).some()).unwrap();
        let reach = graph::closure(N, &a).iter().any(|(x, _)| s.contains(x));
        prop_assert_eq!(c, reach);
    }
}
