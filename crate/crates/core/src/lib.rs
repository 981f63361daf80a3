//! Metamodels with first-order relational semantics, checked and completed by
//! bounded model finding.
//!
//! The pipeline: [`frontend`] parses and resolves a `.aie` metamodel,
//! [`compiler`] lowers it to a [`kernel::RelationalProblem`], [`instance`]
//! turns a partial `.ais` model into universe and bounds, [`translate`]
//! produces CNF, and [`sat`] solves it. [`analysis`] ties these together.

pub mod analysis;
pub mod compiler;
pub mod frontend;
pub mod instance;
pub mod kernel;
pub mod sat;
pub mod span;
pub mod translate;

pub use span::SourceSpan;
