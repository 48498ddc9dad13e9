//! Restricting a system to the accumulation points.

use ellis_kit::dsl::builtins::builtin;
use ellis_kit::dsl::restrict_to_derived;

fn main() -> ellis_kit::Result<()> {
    for name in ["omega3_transitive", "collapse2"] {
        let d = restrict_to_derived(&builtin(name)?)?;
        print!("{d}");
    }
    Ok(())
}
