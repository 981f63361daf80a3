use std::fmt::Write;

use super::{Assignment, Lit, Var};

/// A plain clause list with a running variable count.
#[derive(Clone, Debug, Default)]
pub struct ClauseDb {
    clauses: Vec<Vec<Lit>>,
    num_vars: u32,
    has_empty: bool,
}

impl ClauseDb {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        self.num_vars
    }

    pub fn reserve_vars(&mut self, n: u32) {
        self.num_vars = self.num_vars.max(n);
    }

    /// Stores a clause. Duplicate literals collapse and tautologies are
    /// dropped; an empty clause makes the database permanently unsatisfiable.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        let mut c = lits.to_vec();
        c.sort_unstable();
        c.dedup();
        if c.windows(2).any(|w| w[0] == !w[1]) {
            return;
        }
        if c.is_empty() {
            self.has_empty = true;
        }
        if let Some(max) = c.iter().map(|l| l.var()).max() {
            self.num_vars = self.num_vars.max(max);
        }
        self.clauses.push(c);
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.clauses.len()
    }

    pub fn has_empty_clause(&self) -> bool {
        self.has_empty
    }

    pub fn satisfied_by(&self, assignment: &Assignment) -> bool {
        self.clauses.iter().all(|c| c.iter().any(|&l| assignment.lit(l)))
    }

    /// DIMACS CNF text: a `p cnf` header followed by one 0-terminated clause
    /// per line.
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("p cnf {} {}\n", self.num_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let _ = write!(out, "{} ", l.to_dimacs());
            }
            out.push_str("0\n");
        }
        out
    }

    /// Parses DIMACS CNF text; comment lines start with `c`.
    pub fn from_dimacs(text: &str) -> Result<ClauseDb, String> {
        let mut db = ClauseDb::new();
        let mut current = Vec::new();
        let mut declared = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('c') {
                continue;
            }
            if let Some(header) = line.strip_prefix("p cnf") {
                let nums: Vec<u32> = header
                    .split_whitespace()
                    .map(|t| t.parse().map_err(|_| format!("bad header `{line}`")))
                    .collect::<Result<_, _>>()?;
                if nums.len() != 2 {
                    return Err(format!("bad header `{line}`"));
                }
                declared = Some(nums[0]);
                continue;
            }
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|_| format!("bad literal `{tok}`"))?;
                if v == 0 {
                    db.add_clause(&current);
                    current.clear();
                } else {
                    current.push(Lit::from_dimacs(v));
                }
            }
        }
        if !current.is_empty() {
            db.add_clause(&current);
        }
        if let Some(n) = declared {
            db.reserve_vars(n);
        }
        Ok(db)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tautology_dropped_and_duplicates_collapsed() {
        let mut db = ClauseDb::new();
        db.add_clause(&[Lit::pos(1), Lit::neg(1)]);
        db.add_clause(&[Lit::pos(2), Lit::pos(2), Lit::neg(3)]);
        assert_eq!(db.num_clauses(), 1);
        assert_eq!(db.clauses()[0].len(), 2);
        assert_eq!(db.num_vars(), 3);
    }

    #[test]
    fn dimacs_round_trip() {
        let mut db = ClauseDb::new();
        db.add_clause(&[Lit::pos(1), Lit::neg(2)]);
        db.add_clause(&[Lit::pos(3)]);
        let text = db.to_dimacs();
        assert!(text.starts_with("p cnf 3 2\n"));
        assert!(text.contains("1 -2 0\n"));
        let back = ClauseDb::from_dimacs(&text).unwrap();
        assert_eq!(back.clauses(), db.clauses());
        assert_eq!(back.num_vars(), 3);
    }
}
