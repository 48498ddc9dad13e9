//! Brute-force confirmation of class iterate values along long progressions.

use ellis_kit::dsl::builtins::builtin;
use ellis_kit::orbit::OrbitBounds;
use ellis_kit::piterate::{class_iterate, progression_oracle, ResidueClass};
use ellis_kit::space::Point;

fn main() -> ellis_kit::Result<()> {
    let s = builtin("collapse2b")?;
    for x in [Point::new("A", vec![1]), Point::new("B", vec![4])] {
        for l in 0..2 {
            let c = ResidueClass::new(2, l)?;
            let v = class_iterate(&s, &x, c, OrbitBounds::default())?;
            for (sub, y) in &v.values {
                let ok = progression_oracle(&s, &x, *sub, y, 15, 10_000)?;
                println!("f^({sub})({x}) = {y}  oracle: {}", if ok { "agrees" } else { "disagrees" });
            }
        }
    }
    Ok(())
}
