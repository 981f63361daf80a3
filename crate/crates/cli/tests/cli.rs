use std::path::PathBuf;
use std::process::{Command, Output};

use metareason_core::analysis::Session;
use metareason_core::frontend::load_metamodel;
use metareason_core::instance::{parse_instance, ScopeConfig};
use metareason_core::sat::ClauseDb;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "fixtures", name]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_metareason"))
        .args(args)
        .output()
        .unwrap()
}

fn scratch(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("metareason-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn trivial_metamodel_is_consistent() {
    let p = scratch("empty.aie", "package p { class C { } }");
    let o = run(&["check-meta", &p]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("consistent"));
}

#[test]
fn usage_and_input_errors_exit_2() {
    let tol = fixture("tol.aie");
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["check", &tol]).status.code(), Some(2));
    assert_eq!(run(&["check-meta", "/nonexistent.aie"]).status.code(), Some(2));
    assert_eq!(
        run(&["check-meta", &tol, "--max-solutions", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["check-meta", &tol, "--scope", "Nope=2"]).status.code(), Some(2));
    let bad = scratch("bad.aie", "package p { class C extends { } }");
    let o = run(&["check-meta", &bad]);
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("error["));
    let abs = scratch("abs.ais", "instance x of tol { object n : List<EnginedVehicle> }");
    assert_eq!(run(&["check", &tol, &abs]).status.code(), Some(2));
}

#[test]
fn help_goes_to_stdout() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("check-meta"));
}

#[test]
fn cyclic_instance_is_explained() {
    let o = run(&["check", &fixture("tol.aie"), &fixture("cyclic.ais")]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("[qualifier] acyclic cdr"));
    assert!(out.contains("[fact] t0.cdr = t0"));
    assert!(out.contains("!(x in x.^cdr)"));
}

#[test]
fn same_seed_gives_identical_output() {
    let args = [
        "complete",
        &fixture("tol.aie"),
        &fixture("repaired.ais"),
        "--seed",
        "42",
        "--max-solutions",
        "5",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn json_lines_parse() {
    let o = run(&[
        "complete",
        &fixture("tol.aie"),
        &fixture("repaired.ais"),
        "--format",
        "json",
        "--max-solutions",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let recs: Vec<serde_json::Value> = stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(recs.iter().filter(|r| r["kind"] == "completion").count(), 3);
    assert_eq!(recs.last().unwrap()["kind"], "summary");
}

#[test]
fn dimacs_dump_is_readable_and_solving_continues() {
    let path = std::env::temp_dir().join(format!("metareason-{}.cnf", std::process::id()));
    let p = path.to_string_lossy().into_owned();
    let o = run(&["check", &fixture("tol.aie"), &fixture("cyclic.ais"), "--dimacs", &p]);
    assert_eq!(o.status.code(), Some(1));
    let db = ClauseDb::from_dimacs(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(db.num_clauses() > 0);
}

#[test]
fn log_lists_every_relation_and_constraint_once() {
    let (tol, cyc) = (fixture("tol.aie"), fixture("cyclic.ais"));
    let o = run(&["log", &tol, &cyc, "--default-scope", "1"]);
    assert_eq!(o.status.code(), Some(1));
    let log = stdout(&o);
    let headers: Vec<&str> = log.lines().filter(|l| l.starts_with("== ")).collect();
    assert_eq!(
        headers,
        [
            "== Universe ==",
            "== Bounds for Unary Relations ==",
            "== Bounds for Internal Binary Relations ==",
            "== Bounds for User Binary Relations ==",
            "== Generated Formulas ==",
            "== Outcome and Statistics ==",
        ]
    );
    let mm = load_metamodel(&std::fs::read_to_string(&tol).unwrap(), &tol).unwrap();
    let inst = parse_instance(&std::fs::read_to_string(&cyc).unwrap(), &cyc, &mm).unwrap();
    let scopes = ScopeConfig {
        default_scope: 1,
        ..ScopeConfig::default()
    };
    let s = Session::new(mm, inst, &scopes, None).unwrap();
    let bounds_part = log.split("== Generated Formulas ==").next().unwrap();
    for r in s.bound.bounds.relations() {
        let prefix = format!("{}: lower=", r.name());
        assert_eq!(
            bounds_part.lines().filter(|l| l.starts_with(&prefix)).count(),
            1,
            "{}",
            r.name()
        );
    }
    for c in &s.bound.problem.constraints {
        let prefix = format!("{} s", c.id);
        assert_eq!(log.lines().filter(|l| l.starts_with(&prefix)).count(), 1, "{}", c.id);
    }
    assert!(log.contains("outcome=UNSAT"));
}
