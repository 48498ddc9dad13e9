use thiserror::Error;

use crate::space::Point;

/// Errors raised by the engine. Analysis verdicts such as "undecided" or
/// "discontinuous" are ordinary values, not errors; only operations that
/// cannot produce a meaningful value at all return these.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed point: {0}")]
    MalformedPoint(String),
    #[error("not an escape family: {0}")]
    NotAFamily(String),
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("no space declared")]
    NoSpace,
    #[error("unknown tree `{0}`")]
    UnknownTree(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("unknown sequence `{0}`")]
    UnknownSequence(String),
    #[error("pattern of length {len} is longer than the height {height} of tree `{tree}`")]
    PatternTooLong {
        tree: String,
        len: usize,
        height: usize,
    },
    #[error("invalid declaration: {0}")]
    InvalidDeclaration(String),
    #[error("coverage gap: no rule matches {0}")]
    CoverageGap(Point),
    #[error("derived set is not invariant: rule {rule} maps an accumulation point to an isolated point")]
    DerivedNotInvariant { rule: String },
    #[error("orbit undecided after {steps} steps")]
    Undecided { steps: usize },
    #[error("{0} does not have a finite orbit")]
    NotEventuallyPeriodic(Point),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("modulus {0} exceeds the supported bound")]
    ModulusTooLarge(u64),
    #[error("{0}")]
    Input(String),
}

pub type Result<T> = std::result::Result<T, Error>;
