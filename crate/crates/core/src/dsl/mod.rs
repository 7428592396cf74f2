//! A small language for describing trees.
//!
//! ```text
//! # golden ratio scaling
//! alpha = -1 / (2 * cos(rad(144)));
//!
//! tree koch {
//!     domain: [0, 4];
//!     heading: [pi / 2];
//!     dr: alpha ^ s;
//!     dphi: rad(144);
//!     branches: every(1);
//!     accessory width deriv: -0.1 * width, init 1, units "mm";
//! }
//!
//! main = koch << koch;
//! ```
//!
//! Reading a program is [`parse`] (which also resolves names and collects
//! every problem it finds), [`format`] prints it back canonically and
//! [`compile`] turns it into an [`EnhancedTree`](crate::accessory::EnhancedTree).

mod ast;
mod compile;
mod diagnostic;
mod format;
mod lexer;
mod parser;
mod resolve;

pub use ast::*;
pub use compile::{
    compile, compile_named, compile_with, CompileError, CompileOptions, DEFAULT_GENERATIONS, DEFAULT_STEP,
};
pub use diagnostic::{Diagnostic, Diagnostics, Severity};
pub use format::format;

/// Parses and checks `src`. All problems are reported together, ordered by
/// position.
pub fn parse(src: &str) -> Result<TreeProgram, Diagnostics> {
    let parser::Parsed {
        mut program,
        mut diagnostics,
    } = parser::parse_syntax(src);
    let complete = diagnostics.is_empty();
    resolve::resolve(&mut program, src, &mut diagnostics, complete);
    if diagnostics.is_empty() {
        Ok(program)
    } else {
        diagnostics.sort_by_key(|d| (d.span.start, d.span.end));
        Err(Diagnostics(diagnostics))
    }
}
