//! Periods of periodic points, and a family with unbounded periods.

use ellis_kit::dsl::builtins::builtin;
use ellis_kit::ellis::period_spectrum;
use ellis_kit::orbit::OrbitBounds;

fn main() -> ellis_kit::Result<()> {
    for (name, depth) in [("swap2", 10), ("collapse2", 10), ("omega3_cantor", 6)] {
        let sp = period_spectrum(&builtin(name)?, depth, OrbitBounds::default())?;
        println!("{name}: {sp}");
        for (p, w) in &sp.periods {
            println!("  period {p}: {w}");
        }
    }
    Ok(())
}
