//! Systems compiled into the library, addressable as `builtin:NAME`.

use super::ast::SystemSpec;
use super::parser::parse_system;
use crate::error::{Error, Result};

const SOURCES: &[(&str, &str)] = &[
    ("swap2", include_str!("../../builtins/swap2.dsk")),
    ("collapse2", include_str!("../../builtins/collapse2.dsk")),
    ("collapse2b", include_str!("../../builtins/collapse2b.dsk")),
    ("omega3_transitive", include_str!("../../builtins/omega3_transitive.dsk")),
    ("omega3_cantor", include_str!("../../builtins/omega3_cantor.dsk")),
    ("marcher", include_str!("../../builtins/marcher.dsk")),
    ("descender", include_str!("../../builtins/descender.dsk")),
    ("fixedline", include_str!("../../builtins/fixedline.dsk")),
    ("constant", include_str!("../../builtins/constant.dsk")),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    SOURCES.iter().map(|(n, _)| *n)
}

pub fn source(name: &str) -> Option<&'static str> {
    SOURCES.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

pub fn builtin(name: &str) -> Result<SystemSpec> {
    let src = source(name).ok_or_else(|| Error::Input(format!("unknown builtin `{name}`")))?;
    parse_system(src)
}

/// Loads `builtin:NAME` or a path to a `.dsk` file.
pub fn load(spec: &str) -> Result<SystemSpec> {
    match spec.strip_prefix("builtin:") {
        Some(name) => builtin(name),
        None => {
            let src = std::fs::read_to_string(spec)
                .map_err(|e| Error::Input(format!("cannot read {spec}: {e}")))?;
            parse_system(&src)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::{apply_map, validate_system};
    use crate::space::Point;

    #[test]
    fn all_parse_and_validate() {
        for name in names() {
            let s = builtin(name).unwrap();
            assert_eq!(s.name, name);
            assert!(!s.expect.is_empty(), "{name} has no expect block");
            let r = validate_system(&s, 30);
            assert!(r.is_valid(), "{name}: {r}");
            assert_eq!(r.exact, !s.uses_sequences(), "{name}");
        }
    }

    #[test]
    fn cantor_is_verified_to_depth() {
        let r = validate_system(&builtin("omega3_cantor").unwrap(), 30);
        assert_eq!(r.to_string(), "valid: total, deterministic (verified to depth 30)");
    }

    #[test]
    fn sample_values() {
        let s = builtin("swap2").unwrap();
        assert_eq!(apply_map(&s, &Point::new("A", vec![3])).unwrap(), Point::new("B", vec![3]));
        assert_eq!(apply_map(&s, &Point::new("B", vec![3])).unwrap(), Point::new("A", vec![4]));
        let d = builtin("omega3_transitive").unwrap();
        assert_eq!(
            apply_map(&d, &Point::new("D", vec![0, 0, 5])).unwrap(),
            Point::new("D", vec![7, 0, 0])
        );
    }

    #[test]
    fn printing_round_trips() {
        for name in names() {
            let s = builtin(name).unwrap();
            let again = parse_system(&s.to_string()).unwrap();
            assert_eq!(again, s, "{name}");
        }
    }

    #[test]
    fn unknown_names() {
        assert!(matches!(load("builtin:nope"), Err(Error::Input(_))));
        assert!(matches!(load("/no/such/file.dsk"), Err(Error::Input(_))));
    }
}
