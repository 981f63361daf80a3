use metareason_core::analysis::Session;
use metareason_core::frontend::load_metamodel;
use metareason_core::instance::{parse_instance, ScopeConfig};
use metareason_core::kernel::{holds, ConcreteInstance};
use metareason_core::sat::{SatOutcome, Solver};
use metareason_core::translate::{interpret, translate, TranslateOptions};
use metareason_oracle::brute::{self, SearchOptions};
use metareason_oracle::random::{random_problem, RandomProblem, Shape};
use rand::rngs::StdRng;
use rand::SeedableRng;

const TOL: &str = include_str!("../../../fixtures/tol.aie");
const REPAIRED: &str = include_str!("../../../fixtures/repaired.ais");

fn sat_models(p: &RandomProblem) -> Vec<ConcreteInstance> {
    let t = translate(&p.problem, &p.bounds, &TranslateOptions { bitwidth: p.bitwidth }).unwrap();
    let mut solver = Solver::from_db(&t.cnf);
    let assumptions: Vec<_> = t.selectors.values().copied().collect();
    let projection = t.varmap.primary_vars();
    let mut out = Vec::new();
    while let SatOutcome::Sat(m) = solver.next_model(&projection, &assumptions) {
        out.push(interpret(&t, &m).unwrap());
        assert!(out.len() <= 1 << 12, "enumeration does not terminate");
    }
    out
}

#[test]
fn translation_agrees_with_brute_force_on_random_problems() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let shape = Shape::default();
    let (mut sat, mut unsat) = (0, 0);
    for i in 0..400 {
        let p = random_problem(&mut rng, &shape);
        let slow = brute::enumerate(
            &p.problem,
            &p.bounds,
            p.bitwidth,
            SearchOptions {
                prune: false,
                limit: usize::MAX,
            },
        )
        .unwrap();
        let fast = brute::enumerate(&p.problem, &p.bounds, p.bitwidth, SearchOptions::default()).unwrap();
        assert_eq!(slow.len(), fast.len(), "pruning lost models on problem {i}");
        let models = sat_models(&p);
        assert_eq!(
            models.len(),
            slow.len(),
            "model count differs on problem {i}: {:?}",
            p.problem
                .constraints
                .iter()
                .map(|c| c.formula.to_string())
                .collect::<Vec<_>>()
        );
        for m in &models {
            for c in &p.problem.constraints {
                assert!(holds(m, &c.formula).unwrap());
            }
            assert!(slow.contains(m));
        }
        if slow.is_empty() {
            unsat += 1;
        } else {
            sat += 1;
        }
    }
    // Both verdicts must actually be exercised.
    assert!(sat > 50 && unsat > 50, "sat={sat} unsat={unsat}");
}

#[test]
fn repaired_completion_count_matches_brute_force() {
    let mm = load_metamodel(TOL, "tol.aie").unwrap();
    let inst = parse_instance(REPAIRED, "repaired.ais", &mm).unwrap();
    let mut scopes = ScopeConfig {
        default_scope: 0,
        ..ScopeConfig::default()
    };
    scopes.per_class.insert("TruckList".into(), 2);
    scopes.per_class.insert("EnginedVehicle".into(), 2);
    let mut s = Session::new(mm, inst, &scopes, None).unwrap();
    let t = std::time::Instant::now();
    let n = brute::count(&s.bound.problem, &s.bound.bounds, s.bound.bitwidth).unwrap();
    eprintln!("brute {:?} free={}", t.elapsed(), brute::free_tuples(&s.bound.bounds));
    let e = s.enumerate(1000).unwrap();
    assert!(e.exhausted);
    assert_eq!(e.reports.len(), n);
}
