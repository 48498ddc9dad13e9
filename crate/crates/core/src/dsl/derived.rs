use crate::error::{Error, Result};

use super::ast::SystemSpec;

/// The subsystem `(X', f↾X')`: heights drop by one and only the rules on
/// internal points are kept.
pub fn restrict_to_derived(s: &SystemSpec) -> Result<SystemSpec> {
    let mut rules = Vec::new();
    for r in &s.rules {
        let src_h = s.space.height(&r.src)?;
        if r.pattern.len() >= src_h {
            continue;
        }
        if r.image.len() >= s.space.height(&r.dst)? {
            return Err(Error::DerivedNotInvariant { rule: r.to_string() });
        }
        rules.push(r.clone());
    }
    Ok(SystemSpec {
        name: format!("{}'", s.name),
        ordered: s.ordered,
        space: s.space.derived(),
        seqs: s.seqs.clone(),
        rules,
        expect: Vec::new(),
    })
}
