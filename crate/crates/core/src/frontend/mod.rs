//! The `.aie` metamodel language: lexing, parsing, printing, and name and
//! type resolution.

mod ast;
mod diagnostics;
pub(crate) mod lexer;
mod parser;
mod printer;
mod resolve;

pub use ast::*;
pub use diagnostics::{Diagnostic, DiagnosticKind, Diagnostics, Severity};
pub use parser::{parse, parse_formula};
pub use printer::print_metamodel;
pub use resolve::*;
