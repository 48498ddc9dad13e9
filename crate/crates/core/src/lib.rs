//! Dynamics of finitely presented self-maps of countable compact spaces
//! `ω^r·n + 1`: orbits, iterates along residue classes, continuity of
//! those iterates and the Ellis semigroup they generate.

pub mod dsl;
pub mod ellis;
pub mod error;
pub mod orbit;
pub mod ordinal;
pub mod piterate;
pub mod report;
pub mod space;

pub use error::{Error, Result};
