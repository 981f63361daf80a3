use std::time::Instant;

use metareason_core::analysis::{Session, Verdict};
use metareason_core::frontend::load_metamodel;
use metareason_core::instance::{parse_instance, serialize_instance, PartialInstance, ScopeConfig};
use metareason_core::kernel::holds;

const TOL: &str = include_str!("../../../fixtures/tol.aie");
const CYCLIC: &str = include_str!("../../../fixtures/cyclic.ais");
const REPAIRED: &str = include_str!("../../../fixtures/repaired.ais");

fn repaired_scopes() -> ScopeConfig {
    let mut s = ScopeConfig {
        default_scope: 0,
        ..ScopeConfig::default()
    };
    s.per_class.insert("TruckList".into(), 2);
    s.per_class.insert("EnginedVehicle".into(), 2);
    s
}

#[test]
fn tol_is_satisfiable_at_default_scopes() {
    let mm = load_metamodel(TOL, "tol.aie").unwrap();
    let inst = PartialInstance::empty(&mm.package);
    let t = Instant::now();
    let mut s = Session::new(mm, inst, &ScopeConfig::default(), None).unwrap();
    let v = s.check().unwrap();
    eprintln!(
        "check-meta {:?} vars={} clauses={}",
        t.elapsed(),
        s.translation.stats.num_vars,
        s.translation.stats.num_clauses
    );
    let Verdict::Consistent(r) = v else {
        panic!("expected SAT")
    };
    for c in &s.bound.problem.constraints {
        assert!(holds(&r.completed, &c.formula).unwrap(), "{}", c.label);
    }
}

#[test]
fn cyclic_core_is_acyclic_plus_fact() {
    let mm = load_metamodel(TOL, "tol.aie").unwrap();
    let inst = parse_instance(CYCLIC, "cyclic.ais", &mm).unwrap();
    let t = Instant::now();
    let mut s = Session::new(mm, inst, &ScopeConfig::default(), None).unwrap();
    let v = s.check().unwrap();
    eprintln!("check {:?}", t.elapsed());
    let Verdict::Inconsistent(d) = v else {
        panic!("expected UNSAT")
    };
    assert_eq!(d.labels(), vec!["acyclic cdr", "t0.cdr = t0"]);
}

#[test]
fn repaired_enumerates() {
    let mm = load_metamodel(TOL, "tol.aie").unwrap();
    let inst = parse_instance(REPAIRED, "repaired.ais", &mm).unwrap();
    let t = Instant::now();
    let mut s = Session::new(mm, inst, &repaired_scopes(), None).unwrap();
    let e = s.enumerate(100).unwrap();
    eprintln!(
        "enumerate {:?} count={} exhausted={}",
        t.elapsed(),
        e.reports.len(),
        e.exhausted
    );
    eprintln!("{}", serialize_instance(&e.reports[0]));
    assert!(e.exhausted);
}
