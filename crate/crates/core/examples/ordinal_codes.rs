//! Points of ω^r·n + 1, their ordinal codes and truncations.

use ellis_kit::space::{enumerate_truncation, ordinal_code, rank_of, SpaceSpec, TreeSpec};

fn main() -> ellis_kit::Result<()> {
    let space = SpaceSpec::new(vec![TreeSpec::new("A", 2), TreeSpec::new("B", 1)])?;
    for lit in ["A(0,0)", "A(3,1)", "A(3)", "A()", "B(4)", "B()"] {
        let p = space.parse_point(lit)?;
        println!("{:8} rank {}  code {}", p.to_string(), rank_of(&space, &p)?, ordinal_code(&space, &p)?);
    }
    let t = enumerate_truncation(&space, 2);
    let names: Vec<String> = t.iter().map(ToString::to_string).collect();
    println!("truncation 2: {}", names.join(" "));
    Ok(())
}
