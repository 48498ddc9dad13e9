//! `f^p` for `p` ranging over residue classes, on the two-sequence swap.

use ellis_kit::dsl::builtins::builtin;
use ellis_kit::orbit::OrbitBounds;
use ellis_kit::piterate::{class_iterate, ResidueClass};
use ellis_kit::space::Point;

fn main() -> ellis_kit::Result<()> {
    let s = builtin("swap2")?;
    for c in ["2k+0", "2k+1", "4k+3"] {
        let c: ResidueClass = c.parse()?;
        for x in [Point::new("A", vec![5]), Point::new("B", vec![5]), Point::new("A", vec![])] {
            let v = class_iterate(&s, &x, c, OrbitBounds::default())?;
            for (sub, y) in &v.values {
                println!("f^({sub})({x}) = {y}");
            }
        }
    }
    Ok(())
}
