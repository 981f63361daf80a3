use metareason_core::sat::{ClauseDb, Lit, SatOutcome, Solver};
use metareason_oracle::cnf::{self, Clause};
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn solver_for(clauses: &[Clause], num_vars: u32) -> Solver {
    let mut s = Solver::new();
    s.ensure_vars(num_vars);
    for c in clauses {
        let lits: Vec<Lit> = c.iter().map(|&l| Lit::from_dimacs(l)).collect();
        s.add_clause(&lits);
    }
    s
}

fn model_bits(m: &metareason_core::sat::Assignment, num_vars: u32) -> u64 {
    (1..=num_vars).filter(|&v| m.value(v)).map(|v| 1u64 << (v - 1)).sum()
}

#[test]
fn verdicts_models_and_cores_agree_with_truth_tables() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..300 {
        let n = rng.gen_range(3..=14);
        let m = rng.gen_range(1..=(n as usize * 5));
        let clauses = cnf::random_cnf(&mut rng, n, m, 3);
        let mut s = solver_for(&clauses, n);
        let mut assumptions: Vec<i64> = Vec::new();
        for v in 1..=n as i64 {
            if rng.gen_bool(0.3) {
                assumptions.push(if rng.gen_bool(0.5) { v } else { -v });
            }
        }
        let lits: Vec<Lit> = assumptions.iter().map(|&l| Lit::from_dimacs(l)).collect();
        let expected = cnf::satisfiable_under(&clauses, n, &assumptions);
        match s.solve(&lits) {
            SatOutcome::Sat(model) => {
                assert!(expected);
                let bits = model_bits(&model, n);
                assert!(cnf::eval(&clauses, bits));
                assert!(assumptions
                    .iter()
                    .all(|&l| (bits >> (l.unsigned_abs() - 1) & 1 == 1) == (l > 0)));
            }
            SatOutcome::Unsat(_) => {
                assert!(!expected);
                let core = s.minimize_core(&lits).unwrap();
                let dimacs: Vec<i64> = core.iter().map(|l| l.to_dimacs()).collect();
                assert!(!cnf::satisfiable_under(&clauses, n, &dimacs));
                for i in 0..dimacs.len() {
                    let mut fewer = dimacs.clone();
                    fewer.remove(i);
                    assert!(cnf::satisfiable_under(&clauses, n, &fewer), "core is not 1-minimal");
                }
            }
        }
    }
}

#[test]
fn enumeration_counts_distinct_projections() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..100 {
        let n = rng.gen_range(2..=10);
        let m = rng.gen_range(0..=2 * n as usize);
        let clauses = cnf::random_cnf(&mut rng, n, m, 3);
        let proj: Vec<u32> = (1..=n).filter(|_| rng.gen_bool(0.6)).collect();
        let mut s = solver_for(&clauses, n);
        let mut count = 0;
        while s.next_model(&proj, &[]).is_sat() {
            count += 1;
            assert!(count <= 1 << n);
        }
        assert_eq!(count, cnf::count_projected(&clauses, n, &proj));
    }
}

proptest! {
    #[test]
    fn dimacs_round_trips(seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let clauses = cnf::random_cnf(&mut rng, 6, 10, 3);
        let mut db = ClauseDb::new();
        db.reserve_vars(6);
        for c in &clauses {
            db.add_clause(&c.iter().map(|&l| Lit::from_dimacs(l)).collect::<Vec<_>>());
        }
        let back = ClauseDb::from_dimacs(&db.to_dimacs()).unwrap();
        prop_assert_eq!(back.clauses(), db.clauses());
        prop_assert_eq!(back.num_vars(), db.num_vars());
    }
}
