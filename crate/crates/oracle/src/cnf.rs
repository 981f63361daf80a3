//! Truth-table reasoning over small CNFs, with variables numbered from 1.

use rand::Rng;

/// A clause as DIMACS-style literals.
pub type Clause = Vec<i64>;

/// Bit masks of the positive and negative variables of a clause.
fn masks(clause: &Clause) -> (u64, u64) {
    let (mut pos, mut neg) = (0u64, 0u64);
    for &l in clause {
        let bit = 1u64 << (l.unsigned_abs() - 1);
        if l > 0 {
            pos |= bit;
        } else {
            neg |= bit;
        }
    }
    (pos, neg)
}

fn compiled(clauses: &[Clause]) -> Vec<(u64, u64)> {
    clauses.iter().map(masks).collect()
}

fn satisfies(ms: &[(u64, u64)], a: u64) -> bool {
    ms.iter().all(|&(p, n)| a & p != 0 || !a & n != 0)
}

/// Whether `assignment` (bit i-1 = value of variable i) satisfies every clause.
pub fn eval(clauses: &[Clause], assignment: u64) -> bool {
    satisfies(&compiled(clauses), assignment)
}

/// Some satisfying assignment over `num_vars` variables, found by trying
/// all of them in order.
pub fn find_model(clauses: &[Clause], num_vars: u32) -> Option<u64> {
    assert!(num_vars <= 24, "truth tables beyond 24 variables are too slow");
    let ms = compiled(clauses);
    (0..1u64 << num_vars).find(|&a| satisfies(&ms, a))
}

/// Satisfiability with some literals forced true.
pub fn satisfiable_under(clauses: &[Clause], num_vars: u32, assumptions: &[i64]) -> bool {
    let mut all = clauses.to_vec();
    all.extend(assumptions.iter().map(|&l| vec![l]));
    find_model(&all, num_vars).is_some()
}

/// Number of distinct restrictions of models to `projection`.
pub fn count_projected(clauses: &[Clause], num_vars: u32, projection: &[u32]) -> usize {
    let ms = compiled(clauses);
    let mask: u64 = projection.iter().map(|&v| 1u64 << (v - 1)).sum();
    let mut seen = std::collections::HashSet::new();
    for a in 0..1u64 << num_vars {
        if satisfies(&ms, a) {
            seen.insert(a & mask);
        }
    }
    seen.len()
}

/// A random k-CNF with distinct variables per clause.
pub fn random_cnf(rng: &mut impl Rng, num_vars: u32, num_clauses: usize, k: usize) -> Vec<Clause> {
    (0..num_clauses)
        .map(|_| {
            let mut c: Clause = Vec::with_capacity(k);
            while c.len() < k.min(num_vars as usize) {
                let v = rng.gen_range(1..=num_vars) as i64;
                if c.iter().any(|l| l.abs() == v) {
                    continue;
                }
                c.push(if rng.gen_bool(0.5) { v } else { -v });
            }
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_cases() {
        assert_eq!(find_model(&[vec![1]], 1), Some(1));
        assert_eq!(find_model(&[vec![1, 2], vec![-1], vec![-2]], 2), None);
        assert_eq!(count_projected(&[], 3, &[1, 2]), 4);
        assert!(!satisfiable_under(&[vec![-3, 1], vec![-1]], 3, &[3]));
    }
}
