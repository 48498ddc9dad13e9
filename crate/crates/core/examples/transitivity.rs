//! Dense orbits and the map `f^p ↦ f^p(w)`.

use ellis_kit::dsl::builtins::builtin;
use ellis_kit::ellis::{homeomorphism_check, is_transitive, EllisParams};
use ellis_kit::orbit::OrbitBounds;

fn main() -> ellis_kit::Result<()> {
    for name in ["swap2", "collapse2", "fixedline", "omega3_transitive"] {
        let s = builtin(name)?;
        let t = is_transitive(&s, 4, OrbitBounds::default())?;
        println!("{name}: {t}");
        let params = EllisParams {
            depth: 4,
            ..EllisParams::default()
        };
        let w = t.witness().cloned().unwrap_or_else(|| s.space.parse_point("A(0)").expect("A(0)"));
        println!("  homeomorphism via {w}: {}", homeomorphism_check(&s, &w, &params)?);
    }
    Ok(())
}
