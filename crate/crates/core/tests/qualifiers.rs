use metareason_core::compiler::expand_qualifier;
use metareason_core::frontend::Prop;
use metareason_core::kernel::{holds, ConcreteInstance, Expr, Relation, TupleSet, Universe};
use metareason_oracle::props;

#[test]
fn every_keyword_matches_its_textbook_property_on_three_atoms() {
    let u = Universe::new(["a", "b", "c"]).unwrap();
    let r = Relation::binary("r");
    let d = Relation::unary("D");
    let dom = Expr::rel(&d);
    for p in Prop::ALL {
        let f = expand_qualifier(p, &r, &dom, &dom).unwrap();
        let oracle = props::by_keyword(p.keyword()).unwrap();
        for pairs in props::all_relations(3) {
            let mut inst = ConcreteInstance::new(u.clone(), 4);
            inst.set(&d, TupleSet::univ(&u)).unwrap();
            inst.set(
                &r,
                TupleSet::from_tuples(&u, 2, pairs.iter().map(|&(a, b)| vec![a, b])).unwrap(),
            )
            .unwrap();
            assert_eq!(
                holds(&inst, &f).unwrap(),
                oracle(3, &pairs),
                "{} on {:?}",
                p.keyword(),
                pairs
            );
        }
    }
}
