//! Hand-written maps and brute-force limits used as independent oracles.
#![allow(dead_code)]

use ellis_kit::dsl::{parse_system, SystemSpec};
use ellis_kit::space::Point;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn pt(tree: &str, path: &[u64]) -> Point {
    Point::new(tree, path.to_vec())
}

/// Two-sequence swap: a ↔ b, a_n → b_n, b_n → a_{n+1}.
pub fn swap2(p: &Point) -> Point {
    match (p.tree(), p.path()) {
        ("A", []) => pt("B", &[]),
        ("B", []) => pt("A", &[]),
        ("A", [n]) => pt("B", &[*n]),
        ("B", [n]) => pt("A", &[n + 1]),
        _ => panic!("not a point of 2ω+1: {p}"),
    }
}

/// a ↔ b, a_0 fixed, a_n → b_{n-1}, b_n → a_n.
pub fn collapse2(p: &Point) -> Point {
    match (p.tree(), p.path()) {
        ("A", []) => pt("B", &[]),
        ("B", []) => pt("A", &[]),
        ("A", [0]) => pt("A", &[0]),
        ("A", [n]) => pt("B", &[n - 1]),
        ("B", [n]) => pt("A", &[*n]),
        _ => panic!("not a point of 2ω+1: {p}"),
    }
}

/// As `collapse2`, except a_0 → b.
pub fn collapse2b(p: &Point) -> Point {
    match (p.tree(), p.path()) {
        ("A", [0]) => pt("B", &[]),
        _ => collapse2(p),
    }
}

/// Internal points fixed, `C(k,i) → C(k,i-1)`, bottom row `C(k,0) → C(k+1,0)`.
pub fn marcher(p: &Point) -> Point {
    match p.path() {
        [k, 0] => pt("C", &[k + 1, 0]),
        [k, i] => pt("C", &[*k, i - 1]),
        _ => p.clone(),
    }
}

/// As `marcher`, except the bottom row is fixed.
pub fn descender(p: &Point) -> Point {
    match p.path() {
        [k, i] => pt("C", &[*k, i.saturating_sub(1)]),
        _ => p.clone(),
    }
}

pub fn fixedline(p: &Point) -> Point {
    match p.path() {
        [n] => pt("A", &[n + 1]),
        _ => p.clone(),
    }
}

pub fn constant(_: &Point) -> Point {
    pt("A", &[0])
}

fn c(n: u64) -> u64 {
    2 + 3 * n
}

/// The dense-orbit map on ω³+1 in index form: `d` is `[]`, `d_k` is `[k]`,
/// `d_{j,k}` is `[j,k]`, `d_{i,j,k}` is `[i,j,k]`.
/// `d_{0,c_n+1,0}` goes to `d_{0,c_n,0}`, and `[i,4,0]` goes to `[i,1,0]`.
pub fn dense_indexed(d: &[u64]) -> Vec<u64> {
    match *d {
        [] => vec![],
        [n] => vec![n],
        [0, 0] => vec![],
        [1, 0] => vec![3, 0],
        [2, 0] => vec![0, 0],
        [0, 1] => vec![0],
        [j, 0] if j >= 4 && j % 3 == 1 => vec![j - 3, 0],
        [j, 0] if j >= 5 && j % 3 == 2 => vec![j - 3, 0],
        [j, 0] if j >= 3 && j % 3 == 0 => vec![j + 3, 0],
        [j, k] if j > 0 && k > 0 => vec![j - 1, k],
        [0, k] => vec![k - 1],
        [i, j, k] if j > 0 && k > 0 => vec![i + 1, j - 1, k],
        [i, 0, 2] => vec![0, i, 1],
        [i, 0, k] if k > 2 => vec![0, i + 1, k - 1],
        [i, 0, 1] => vec![0, c(i + 1) - 1, 0],
        [i, 2, 0] => vec![i + 1, 0, 0],
        [i, 4, 0] => vec![i, 1, 0],
        [i, 1, 0] => vec![i, 3, 0],
        [i, 0, 0] => vec![0, 0, i + 2],
        [i, j, 0] if j >= 5 && j % 3 == 2 => vec![i + 1, j - 3, 0],
        [i, j, 0] if j >= 7 && j % 3 == 1 => vec![i + 1, j - 3, 0],
        [0, j, 0] if j % 3 == 0 => vec![0, j - 1, 0],
        [i, j, 0] if j % 3 == 0 => vec![i - 1, j + 3, 0],
        _ => unreachable!("every index triple is covered: {d:?}"),
    }
}

/// `D(k,j,i)` stands for `d_{i,j,k}`.
pub fn to_indices(p: &Point) -> Vec<u64> {
    p.path().iter().rev().copied().collect()
}

pub fn from_indices(d: &[u64]) -> Point {
    Point::new("D", d.iter().rev().copied().collect())
}

pub fn dense(p: &Point) -> Point {
    from_indices(&dense_indexed(&to_indices(p)))
}

/// `a_0 = 0`, `a_n = a_{n-1} + n + 1`.
pub fn triangular(n: u64) -> u64 {
    (0..=n).map(|k| k + 1).sum::<u64>() - 1
}

/// The unbounded-period map on the first two levels, in index form
/// (`d_{i,k}` is `[i,k]`).
pub fn cantor_indexed(d: &[u64]) -> Option<Vec<u64>> {
    let index = |k: u64| (0..=k).find(|&n| triangular(n) == k);
    Some(match *d {
        [] => vec![],
        [k] => match index(k) {
            Some(n) => vec![triangular(n + 1) - 1],
            None => vec![k - 1],
        },
        [0, 0] => vec![],
        [0, k] => match index(k) {
            Some(n) => vec![triangular(n - 1)],
            None => vec![0, k - 1],
        },
        [i, k] => match index(k) {
            Some(n) => vec![i - 1, triangular(n + 1) - 1],
            None => vec![i, k - 1],
        },
        _ => return None,
    })
}

/// `f(D(k))` for the level-one and level-two points of the
/// unbounded-period map; deeper points have no independent table.
pub fn cantor(p: &Point) -> Option<Point> {
    cantor_indexed(&to_indices(p)).map(|d| from_indices(&d))
}

/// The hand-written map for a builtin, on the points it covers.
pub fn oracle(name: &str, p: &Point) -> Option<Point> {
    Some(match name {
        "swap2" => swap2(p),
        "collapse2" => collapse2(p),
        "collapse2b" => collapse2b(p),
        "omega3_transitive" => dense(p),
        "omega3_cantor" => return cantor(p),
        "marcher" => marcher(p),
        "descender" => descender(p),
        "fixedline" => fixedline(p),
        "constant" => constant(p),
        _ => return None,
    })
}

/// Brute-force `f^p(x)` for `p ∈ (Nℕ+l)*`: the limit of `f^{kN+l}(x)`
/// read off the tail of the progression. Tails that are eventually
/// constant give that point; tails whose first varying coordinate grows
/// without bound give the common prefix.
pub fn progression_limit(f: impl Fn(&Point) -> Point, x: &Point, modulus: u64, residue: u64, terms: usize) -> Point {
    let mut p = x.clone();
    for _ in 0..residue {
        p = f(&p);
    }
    let mut seq = Vec::with_capacity(terms);
    for _ in 0..terms {
        seq.push(p.clone());
        for _ in 0..modulus {
            p = f(&p);
        }
    }
    let tail = &seq[terms / 2..];
    if tail.iter().all(|q| *q == tail[0]) {
        return tail[0].clone();
    }
    let first = &tail[0];
    let cut = (0..first.depth())
        .find(|&d| tail.iter().any(|q| q.tree() != first.tree() || q.depth() <= d || q.path()[d] != first.path()[d]))
        .expect("a varying tail differs somewhere");
    assert!(
        tail.iter().all(|q| q.tree() == first.tree() && q.depth() == first.depth()),
        "tail changes shape"
    );
    assert!(tail.windows(2).all(|w| w[1].path()[cut] > w[0].path()[cut]), "tail does not escape");
    Point::new(first.tree(), first.path()[..cut].to_vec())
}

/// A random ordered, sequence-free system on one height-2 tree whose
/// internal points are all fixed. Only finitely many points get arbitrary
/// images; row tails move to `C(k, i±c)` or to `C(k)`, and bottom rows move
/// to nearby rows, so `f` is continuous.
pub fn random_fixed_system(rng: &mut ChaCha8Rng, id: usize) -> SystemSpec {
    let mut rules = vec!["rule C() -> C()".to_string(), "rule C(k) -> C(k)".to_string()];
    for _ in 0..rng.gen_range(0..4) {
        let rows = match rng.gen_range(0..4) {
            0 => "k".to_string(),
            1 => format!("k | k >= {}", rng.gen_range(1..4)),
            2 => format!("k | k % 2 == {}", rng.gen_range(0..2)),
            _ => format!("k | k <= {}", rng.gen_range(0..3)),
        };
        let lo = rng.gen_range(0..3);
        let rule = match rng.gen_range(0..7) {
            0 => {
                let img = match rng.gen_range(0..3) {
                    0 => "C()".to_string(),
                    1 => format!("C({})", rng.gen_range(0..4)),
                    _ => format!("C({}, {})", rng.gen_range(0..4), rng.gen_range(0..4)),
                };
                format!("rule C(k | k <= {}, i | i <= {lo}) -> {img}", rng.gen_range(0..3))
            }
            1 => format!("rule C({rows}, i | i <= {lo}) -> C(k+{}, {})", rng.gen_range(0..3), rng.gen_range(0..3)),
            2 => format!("rule C(k | k >= 1, i | i <= {lo}) -> C(k-1, i)"),
            3 => format!("rule C({rows}, i | i >= {lo}, i % 2 == {}) -> C(k, i+1)", rng.gen_range(0..2)),
            4 => format!("rule C({rows}, i | i >= {}) -> C(k, i-1)", lo + 1),
            5 => format!("rule C({rows}, i | i >= {lo}) -> C(k)"),
            _ => format!("rule C({rows}, i | i <= {lo}) -> C(k+1, i)"),
        };
        rules.push(rule);
    }
    rules.push("rule C(k, i | i >= 1) -> C(k, i-1)".to_string());
    let last = ["C(k, 0)", "C(k+1, 0)", "C(k)", "C(k, 1)"][rng.gen_range(0..4)];
    rules.push(format!("rule C(k, i) -> {last}"));
    let src = format!(
        "system random{id} ordered\nspace {{ tree C height 2 }}\nrules {{\n  {}\n}}\n",
        rules.join("\n  ")
    );
    parse_system(&src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}

/// A pattern entry: a constant, or `var` with an interval or congruence guard.
fn random_entry(rng: &mut ChaCha8Rng, var: &str) -> String {
    let guard = match rng.gen_range(0..6) {
        0 => String::new(),
        1 => format!(" | {var} >= {}", rng.gen_range(0..6)),
        2 => format!(" | {var} <= {}", rng.gen_range(0..6)),
        3 => format!(" | {var} % {} == {}", rng.gen_range(2..5), rng.gen_range(0..2)),
        4 => format!(" | {var} >= {}, {var} % 3 == {}", rng.gen_range(0..4), rng.gen_range(0..3)),
        _ => return rng.gen_range(0..4).to_string(),
    };
    format!("{var}{guard}")
}

/// A random system on `A` (height 1) and `C` (height 2) whose guards may
/// leave gaps or overlaps; images are constants, so they never go negative.
pub fn random_guarded_system(rng: &mut ChaCha8Rng, id: usize) -> SystemSpec {
    let ordered = rng.gen_bool(0.3);
    let mut rules = vec!["rule A() -> A()".to_string(), "rule C() -> C()".to_string()];
    for _ in 0..rng.gen_range(1..4) {
        rules.push(format!("rule A({}) -> A({})", random_entry(rng, "n"), rng.gen_range(0..3)));
    }
    for _ in 0..rng.gen_range(1..3) {
        rules.push(format!("rule C({}) -> C({})", random_entry(rng, "k"), rng.gen_range(0..3)));
    }
    for _ in 0..rng.gen_range(1..4) {
        let k = random_entry(rng, "k");
        let i = random_entry(rng, "i");
        rules.push(format!("rule C({k}, {i}) -> C(0, {})", rng.gen_range(0..3)));
    }
    let src = format!(
        "system guarded{id}{}\nspace {{ tree A height 1  tree C height 2 }}\nrules {{\n  {}\n}}\n",
        if ordered { " ordered" } else { "" },
        rules.join("\n  ")
    );
    parse_system(&src).unwrap_or_else(|e| panic!("{e}\n{src}"))
}
