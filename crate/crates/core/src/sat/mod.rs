//! CNF satisfiability: clause storage, a CDCL solver with assumptions,
//! core minimization, and model enumeration.

mod clause_db;
mod solver;

pub use clause_db::ClauseDb;
pub use solver::{Assignment, Branching, SatOutcome, Solver, SolverStats};

use std::fmt;
use std::ops::Not;

use thiserror::Error;

/// A boolean variable; ids start at 1.
pub type Var = u32;

/// A variable with a polarity, packed as `var * 2 + negated`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lit(u32);

impl Lit {
    pub fn new(var: Var, positive: bool) -> Lit {
        assert!(var >= 1, "variable ids start at 1");
        Lit(var * 2 + u32::from(!positive))
    }

    pub fn pos(var: Var) -> Lit {
        Lit::new(var, true)
    }

    pub fn neg(var: Var) -> Lit {
        Lit::new(var, false)
    }

    pub fn var(self) -> Var {
        self.0 >> 1
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub(crate) fn code(self) -> usize {
        self.0 as usize
    }

    pub fn to_dimacs(self) -> i64 {
        let v = i64::from(self.var());
        if self.is_positive() {
            v
        } else {
            -v
        }
    }

    pub fn from_dimacs(lit: i64) -> Lit {
        assert!(lit != 0, "0 is the DIMACS clause terminator");
        Lit::new(lit.unsigned_abs() as Var, lit > 0)
    }
}

impl Not for Lit {
    type Output = Lit;
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }
}

impl fmt::Debug for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_dimacs())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SatError {
    #[error("core minimization requires an unsatisfiable assumption set")]
    MinimizeOnSat,
}
