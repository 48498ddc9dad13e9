//! The system description language: syntax tree, parser, validator and
//! the builtin systems.

mod ast;
pub mod builtins;
mod derived;
mod parser;
mod seq;
mod validate;

pub use ast::{
    apply_map, apply_map_traced, apply_n, eval_atom, eval_guard, Atom, Entry, Env, Expr, Rule,
    SystemSpec, Term,
};
pub use derived::restrict_to_derived;
pub use parser::parse_system;
pub use seq::{Poly, SeqDecl, SeqDef};
pub use validate::{brute_force, validate_system, BruteForce, NegativeImage, Overlap, ValidationReport};
