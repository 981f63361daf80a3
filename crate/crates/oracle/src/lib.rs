//! Slow, obviously-correct reference implementations used to check the
//! solver, translator and compiler.

pub mod brute;
pub mod cnf;
pub mod graph;
pub mod ints;
pub mod props;
pub mod random;
