//! Relational logic: universes, tuple sets, bounds, the formula AST and its
//! reference evaluator.

mod ast;
mod bounds;
mod eval;
mod instance;
mod print;
mod problem;
mod relation;
mod tuples;
mod universe;

pub use ast::*;
pub use bounds::Bounds;
pub use eval::{evaluate, holds, int_range, wrap, Env, Evaluator, Node, Value};
pub use instance::{ConcreteInstance, DEFAULT_BITWIDTH};
pub use problem::{Category, Constraint, ConstraintId, RelationalProblem};
pub use relation::{Relation, RelationKind};
pub use tuples::{Tuple, TupleSet};
pub use universe::Universe;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("duplicate atom `{0}`")]
    DuplicateAtom(String),
    #[error("a universe needs at least one atom")]
    EmptyUniverse,
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },
    #[error("join of arity {left} with arity {right} is empty-arity")]
    JoinArity { left: usize, right: usize },
    #[error("lower bound is not contained in upper bound: {0:?}")]
    BoundViolation(Vec<Vec<String>>),
    #[error("tuple sets are drawn from different universes")]
    UniverseMismatch,
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("variable `{0}` must be bound to a single atom")]
    NotSingleton(String),
    #[error("relation `{0}` has no value")]
    UnboundRelation(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("integer {0} is outside the configured bitwidth")]
    IntOutOfRange(i64),
    #[error("projection column {column} out of range for arity {arity}")]
    ColumnOutOfRange { column: i64, arity: usize },
    #[error("projection columns must be integer literals")]
    NonConstantColumn,
}
