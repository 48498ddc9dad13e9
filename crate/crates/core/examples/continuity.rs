//! Continuity of class iterates at accumulation points, and the two
//! discontinuity criteria.

use ellis_kit::dsl::builtins::builtin;
use ellis_kit::piterate::{continuity_at, t36_classify, t39_sufficient, ContinuityMode, ResidueClass, SampleBounds};
use ellis_kit::space::{EscapeFamily, Point, Slot};

fn main() -> ellis_kit::Result<()> {
    let sb = SampleBounds::default();
    for (name, at) in [("swap2", "A()"), ("collapse2", "A()"), ("omega3_transitive", "D(0)")] {
        let s = builtin(name)?;
        let a = s.space.parse_point(at)?;
        println!("{name} at {a}: f is {}", continuity_at(&s, ContinuityMode::BaseMap, &a, sb)?);
        for l in 0..2 {
            let mode = ContinuityMode::Class(ResidueClass::new(2, l)?);
            println!("  {mode}: {}", continuity_at(&s, mode, &a, sb)?);
        }
    }

    let marcher = builtin("marcher")?;
    for a in [Point::new("C", vec![5]), Point::new("C", vec![])] {
        println!("marcher at {a}: {}", t36_classify(&marcher, &a, sb)?);
    }

    let collapse2 = builtin("collapse2")?;
    let family = EscapeFamily::new("A", vec![Slot::Divergent])?;
    let v = t39_sufficient(&collapse2, &Point::new("A", vec![]), &Point::new("A", vec![0]), &family, sb)?;
    println!("collapse2 criterion with b = A(0): {v}");
    Ok(())
}
