//! Enumerating E(X,f) and classifying it.

use ellis_kit::dsl::builtins::{builtin, names};
use ellis_kit::ellis::{elements_equal, enumerate_ellis, EllisElement, EllisParams};
use ellis_kit::orbit::OrbitBounds;
use ellis_kit::piterate::ResidueClass;

fn main() -> ellis_kit::Result<()> {
    let params = EllisParams {
        depth: 6,
        ..EllisParams::default()
    };
    for name in names() {
        let m = enumerate_ellis(&builtin(name)?, &params)?;
        println!("{name:18} {m}");
    }

    let s = builtin("swap2")?;
    let f0 = EllisElement::ClassFunction(ResidueClass::new(2, 0)?);
    let f1 = EllisElement::ClassFunction(ResidueClass::new(2, 1)?);
    let b = OrbitBounds::default();
    println!("{f0} vs {f1}: {}", elements_equal(&s, f0, f1, 10, b)?);
    println!("f^2 vs {f0}: {}", elements_equal(&s, EllisElement::NatPower(2), f0, 10, b)?);
    Ok(())
}
