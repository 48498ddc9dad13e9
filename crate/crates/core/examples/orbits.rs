//! Orbit classification, ω-limit sets and orbit closures.

use ellis_kit::dsl::builtins::builtin;
use ellis_kit::orbit::{analyze_orbit, eventually_periodic_data, omega_limit, orbit_closure, OrbitBounds};
use ellis_kit::space::Point;

fn main() -> ellis_kit::Result<()> {
    let b = OrbitBounds::default();
    let swap2 = builtin("swap2")?;
    let a3 = Point::new("A", vec![3]);
    println!("swap2 {a3}: {}", analyze_orbit(&swap2, &a3, b)?);
    let omega = omega_limit(&swap2, &a3, b)?;
    println!("  ω = {:?}", omega.points.iter().map(ToString::to_string).collect::<Vec<_>>());
    let closure = orbit_closure(&swap2, &Point::new("A", vec![0]), b)?;
    println!("  B(7) in closure of A(0): {}", closure.contains(&Point::new("B", vec![7])));

    let collapse2 = builtin("collapse2")?;
    let x = Point::new("B", vec![4]);
    println!("collapse2 {x}: {}", analyze_orbit(&collapse2, &x, b)?);
    let d = eventually_periodic_data(&collapse2, &x, b)?;
    println!("  (m, n) = ({}, {})", d.m, d.n);

    let dense = builtin("omega3_transitive")?;
    println!("omega3_transitive D(0,0,0): {}", analyze_orbit(&dense, &Point::new("D", vec![0, 0, 0]), b)?);
    Ok(())
}
