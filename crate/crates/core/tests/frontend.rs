use metareason_core::frontend::{load_metamodel, parse, print_metamodel, DiagnosticKind, Ty};

const TOL: &str = include_str!("../../../fixtures/tol.aie");

#[test]
fn tol_parses_with_ten_classifiers() {
    let ast = parse(TOL, "tol.aie").unwrap();
    let names: Vec<&str> = ast.classifiers().iter().map(|c| c.name()).collect();
    assert_eq!(names.len(), 10, "{names:?}");
}

#[test]
fn tol_resolves() {
    let mm = load_metamodel(TOL, "tol.aie").unwrap();
    for c in [
        "Object",
        "List<EnginedVehicle>",
        "List<NonEnginedVehicle>",
        "Nil",
        "Memory",
        "TruckList",
    ] {
        assert!(mm.classes.contains_key(c), "missing {c}");
    }
    assert!(mm.class("Object").unwrap().is_abstract);
    assert!(mm.class("List<EnginedVehicle>").unwrap().is_abstract);
    let lists = mm.features.iter().find(|f| f.name == "lists").unwrap();
    let expected: Vec<Ty> = ["List<EnginedVehicle>", "List<NonEnginedVehicle>"]
        .iter()
        .map(|s| Ty::Class(s.to_string()))
        .collect();
    assert_eq!(lists.target.iter().cloned().collect::<Vec<_>>(), expected);
    assert!(mm.features.iter().all(|f| f.name != "identifier"));
    assert!(mm.features.iter().find(|f| f.name == "eq").unwrap().model);
    assert!(mm.warnings.is_empty());
}

#[test]
fn tol_round_trips_through_printer() {
    let ast = parse(TOL, "tol.aie").unwrap();
    let printed = print_metamodel(&ast);
    let again = parse(&printed, "printed.aie").unwrap_or_else(|e| panic!("{}\n{printed}", e.render(Some(&printed))));
    assert_eq!(print_metamodel(&again), printed);
    let f1: Vec<_> = ast.packages[0]
        .classifiers
        .iter()
        .map(|c| c.name().to_string())
        .collect();
    let f2: Vec<_> = again.packages[0]
        .classifiers
        .iter()
        .map(|c| c.name().to_string())
        .collect();
    assert_eq!(f1, f2);
}

#[test]
fn syntax_error_reports_expected_set() {
    let e = parse("class C extends { }", "x.aie").unwrap_err();
    assert_eq!(e.0.len(), 1);
    assert_eq!(e.0[0].kind, DiagnosticKind::SyntaxError);
}

#[test]
fn unknown_type_is_reported_with_span() {
    let e = load_metamodel("package p { class A { property r : Missing [?]; } }", "x.aie").unwrap_err();
    assert_eq!(e.kinds(), vec![DiagnosticKind::UnknownName]);
    let s = e.0[0].span.clone().unwrap();
    assert_eq!((s.line, s.column), (1, 36));
}

#[test]
fn nullable_and_attribute_cardinality_warn() {
    let mm = load_metamodel(
        "package p { class A { nullable attribute one n : String [1]; } }",
        "x.aie",
    )
    .unwrap();
    assert_eq!(mm.warnings.len(), 2);
    assert_eq!(mm.features[0].mult.lower, 0);
}
