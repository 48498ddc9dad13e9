//! Parsing a system from source and checking totality and determinism.

use ellis_kit::dsl::{brute_force, parse_system, validate_system};

const SOURCE: &str = "
system shift_pairs
space { tree A height 1 }
rules {
  rule A() -> A()
  rule A(n | n % 2 == 0) -> A(n+2)
  rule A(n | n % 2 == 1) -> A(n-1)
}
";

const BROKEN: &str = "
system gappy
space { tree A height 1 }
rules {
  rule A() -> A()
  rule A(n | n >= 3) -> A(n-1)
}
";

fn main() -> ellis_kit::Result<()> {
    let s = parse_system(SOURCE)?;
    print!("{s}");
    println!("{}", validate_system(&s, 30));
    let b = parse_system(BROKEN)?;
    println!("{}", validate_system(&b, 30));
    let bf = brute_force(&b, 200);
    println!("brute force over {} points: {} gaps", bf.points, bf.gaps.len());
    match parse_system("system x\nspace { tree A height 1 }\nrules { rule A(n) -> A(m) }") {
        Err(e) => println!("{e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
