//! Totality, determinism and nonnegativity checks.
//!
//! Sequence-free systems are decided exactly: every guard atom constrains a
//! single coordinate by thresholds and congruences, so a coordinate's truth
//! pattern depends only on `min(v, T)` and `v mod L`, and a finite box of
//! representatives covers every cell. With sequence guards the checks run
//! on a truncation and the report says so.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;
use rayon::prelude::*;

use super::ast::{eval_atom, Atom, Entry, Env, Expr, Rule, SystemSpec, Term};
use super::seq::SeqDecl;
use crate::space::{code_key, Point};

/// Largest representative box enumerated in exact mode.
const EXACT_BOX_LIMIT: u64 = 20_000_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Overlap {
    pub point: Point,
    pub first: usize,
    pub second: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeImage {
    pub rule: usize,
    pub witness: Option<Point>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    /// Decided on all of `X` rather than on a truncation.
    pub exact: bool,
    pub depth: u64,
    pub gaps: Vec<Point>,
    pub overlaps: Vec<Overlap>,
    pub negative: Vec<NegativeImage>,
}

impl ValidationReport {
    pub fn is_total(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn is_deterministic(&self) -> bool {
        self.overlaps.is_empty()
    }

    pub fn is_valid(&self) -> bool {
        self.is_total() && self.is_deterministic() && self.negative.is_empty()
    }

    pub fn mode(&self) -> String {
        if self.exact {
            "exact".to_string()
        } else {
            format!("verified to depth {}", self.depth)
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return write!(f, "valid: total, deterministic ({})", self.mode());
        }
        let mut issues = Vec::new();
        if let Some(p) = self.gaps.first() {
            issues.push(format!("coverage gap at {p}"));
        }
        if let Some(o) = self.overlaps.first() {
            issues.push(format!(
                "rules {} and {} overlap at {}",
                o.first + 1,
                o.second + 1,
                o.point
            ));
        }
        for n in &self.negative {
            match &n.witness {
                Some(p) => issues.push(format!("rule {} has a negative image at {p}", n.rule + 1)),
                None => issues.push(format!("rule {} may produce a negative index", n.rule + 1)),
            }
        }
        write!(f, "invalid ({}): {}", self.mode(), issues.join("; "))
    }
}

/// Validates `s`. Sequence-free systems are decided exactly and `depth` is
/// only recorded; otherwise every point with coordinates `< depth` is
/// checked.
pub fn validate_system(s: &SystemSpec, depth: u64) -> ValidationReport {
    let mut negative: Vec<NegativeImage> = (0..s.rules.len())
        .filter(|&i| !image_bounded_below(&s.rules[i], &s.seqs))
        .map(|rule| NegativeImage { rule, witness: None })
        .collect();
    let exact_box = (!s.uses_sequences()).then(|| representatives(s)).flatten();
    let (exact, points): (bool, Vec<Vec<u64>>) = match exact_box {
        Some(reps) => (true, vec![reps]),
        None => (false, vec![(0..depth).collect()]),
    };
    let scan = scan_box(s, &points[0]);
    for (rule, p) in scan.negative {
        if let Some(n) = negative.iter_mut().find(|n| n.rule == rule) {
            n.witness.get_or_insert(p);
        } else {
            negative.push(NegativeImage {
                rule,
                witness: Some(p),
            });
        }
    }
    negative.sort_by_key(|n| n.rule);
    ValidationReport {
        exact,
        depth,
        gaps: scan.gaps,
        overlaps: if s.ordered { Vec::new() } else { scan.overlaps },
        negative,
    }
}

/// Representative coordinate values: `0..T` plus one value per residue
/// mod `L` beyond `T`.
fn representatives(s: &SystemSpec) -> Option<Vec<u64>> {
    let t = s.max_constant() + 1;
    let l = s
        .rules
        .iter()
        .flat_map(|r| &r.guard)
        .filter_map(|a| match a {
            Atom::Mod { modulus, .. } => Some(*modulus),
            _ => None,
        })
        .fold(1u64, |acc, m| acc.lcm(&m));
    let width = t + l;
    let h = s.space.trees().iter().map(|t| t.height).max().unwrap_or(0) as u32;
    if width.checked_pow(h).is_none_or(|n| n > EXACT_BOX_LIMIT) {
        return None;
    }
    Some((0..width).collect())
}

struct Scan {
    gaps: Vec<Point>,
    overlaps: Vec<Overlap>,
    negative: Vec<(usize, Point)>,
}

/// Matches every point whose coordinates are drawn from `values`.
fn scan_box(s: &SystemSpec, values: &[u64]) -> Scan {
    let mut points = Vec::new();
    for t in s.space.trees() {
        for m in 0..=t.height {
            for_each_path(values, m, |path| {
                points.push(Point::with_tree(t.id.clone(), path.to_vec()));
            });
        }
    }
    points.sort_by_cached_key(|p| code_key(&s.space, p));
    let results: Vec<(Vec<usize>, Option<usize>)> = points
        .par_iter()
        .map(|p| {
            let hits: Vec<usize> = s
                .rules
                .iter()
                .enumerate()
                .filter(|(_, r)| r.matches(p, &s.seqs))
                .map(|(i, _)| i)
                .take(2)
                .collect();
            let bad = match hits.first() {
                Some(&i) => {
                    let r = &s.rules[i];
                    let env = r.bind(p, &s.seqs).expect("matched above");
                    r.eval_image(&env, &s.seqs).is_none().then_some(i)
                }
                _ => None,
            };
            (hits, bad)
        })
        .collect();
    let mut scan = Scan {
        gaps: Vec::new(),
        overlaps: Vec::new(),
        negative: Vec::new(),
    };
    for (p, (hits, bad)) in points.into_iter().zip(results) {
        match hits.as_slice() {
            [] => scan.gaps.push(p.clone()),
            [a, b, ..] => scan.overlaps.push(Overlap {
                point: p.clone(),
                first: *a,
                second: *b,
            }),
            _ => {}
        }
        if let Some(i) = bad {
            if !scan.negative.iter().any(|(r, _)| *r == i) {
                scan.negative.push((i, p));
            }
        }
    }
    scan
}

fn for_each_path(values: &[u64], len: usize, mut f: impl FnMut(&[u64])) {
    if len == 0 {
        f(&[]);
        return;
    }
    if values.is_empty() {
        return;
    }
    let mut idx = vec![0usize; len];
    let mut path: Vec<u64> = vec![values[0]; len];
    loop {
        f(&path);
        let mut k = len;
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < values.len() {
                path[k] = values[idx[k]];
                break;
            }
            idx[k] = 0;
            path[k] = values[0];
        }
    }
}

/// Bounds `(lower, upper)` on a pattern variable or binder implied by its
/// own guard atoms.
fn var_bounds(rule: &Rule, var: &str, seqs: &[Arc<SeqDecl>]) -> Option<(u64, Option<u64>)> {
    let mut lo = 0u64;
    let mut hi: Option<u64> = None;
    let mut mods = Vec::new();
    for a in rule.atoms_on(var) {
        match a {
            Atom::Ge(_, c) => lo = lo.max(*c),
            Atom::Le(_, c) => hi = Some(hi.map_or(*c, |h| h.min(*c))),
            Atom::Mod { modulus, residue, .. } => mods.push((*modulus, *residue)),
            Atom::In {
                seq,
                binder,
                offset,
                ..
            } => {
                let s = seqs.iter().find(|s| s.name == *seq)?;
                let (nlo, nhi) = match binder {
                    Some(b) => var_bounds(rule, b, seqs)?,
                    None => (0, None),
                };
                let lo_val = s.value(nlo)? as i64 + offset;
                lo = lo.max(lo_val.max(0) as u64);
                if let Some(nh) = nhi {
                    let hi_val = (s.value(nh)? as i64 + offset).max(0) as u64;
                    hi = Some(hi.map_or(hi_val, |h| h.min(hi_val)));
                }
            }
            Atom::NotIn { .. } => {}
        }
    }
    let period = mods.iter().fold(1u64, |acc, (m, _)| acc.lcm(m));
    let excluded: Vec<&Atom> = rule
        .atoms_on(var)
        .filter(|a| matches!(a, Atom::NotIn { .. }))
        .collect();
    let admissible = |v: u64| {
        mods.iter().all(|(m, r)| v % m == *r)
            && excluded.iter().all(|a| {
                let mut env = Env::default();
                env.set(var, v);
                eval_atom(a, &mut env, seqs).unwrap_or(true)
            })
    };
    let window = if excluded.is_empty() { period } else { period + 4096 };
    let first = (lo..lo + window).find(|&v| admissible(v));
    match first {
        Some(v) => Some((v, hi)),
        // empty cell: any bound is sound
        None => Some((lo, Some(lo))),
    }
}

/// A lower bound on `e` over the rule's cell; `None` when unbounded below.
fn expr_lower_bound(rule: &Rule, e: &Expr, seqs: &[Arc<SeqDecl>]) -> Option<i128> {
    let mut total = 0i128;
    for t in &e.terms {
        total += match t {
            Term::Const(c) => *c as i128,
            Term::Var { coef, var } => {
                let (lo, hi) = var_bounds(rule, var, seqs)?;
                if *coef >= 0 {
                    *coef as i128 * lo as i128
                } else {
                    *coef as i128 * hi? as i128
                }
            }
            Term::Seq {
                coef,
                seq,
                var,
                offset,
            } => {
                let s = seqs.iter().find(|s| s.name == *seq)?;
                let (lo, hi) = var_bounds(rule, var, seqs)?;
                let at = |n: u64| -> Option<i128> {
                    let idx = n as i64 + offset;
                    Some(s.value(u64::try_from(idx).ok()?)? as i128)
                };
                if *coef >= 0 {
                    *coef as i128 * at(lo)?
                } else {
                    *coef as i128 * at(hi?)?
                }
            }
        };
    }
    Some(total)
}

fn image_bounded_below(rule: &Rule, seqs: &[Arc<SeqDecl>]) -> bool {
    rule.image
        .iter()
        .all(|e| expr_lower_bound(rule, e, seqs).is_some_and(|v| v >= 0))
}

/// Result of brute-force matching over a truncation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BruteForce {
    pub points: u64,
    pub gaps: Vec<Point>,
    /// Points matched by two or more rules.
    pub overlaps: Vec<Point>,
}

/// A rule compiled for fast matching on sequence-free guards.
struct Compiled {
    src: Arc<str>,
    len: usize,
    checks: Vec<Vec<Check>>,
}

enum Check {
    Eq(u64),
    Ge(u64),
    Le(u64),
    Mod(u64, u64),
}

fn compile(rule: &Rule) -> Option<Compiled> {
    if rule.guard.iter().any(Atom::uses_sequence) {
        return None;
    }
    let checks = rule
        .pattern
        .iter()
        .map(|e| match e {
            Entry::Const(c) => vec![Check::Eq(*c)],
            Entry::Var(v) => rule
                .atoms_on(v)
                .map(|a| match a {
                    Atom::Ge(_, c) => Check::Ge(*c),
                    Atom::Le(_, c) => Check::Le(*c),
                    Atom::Mod { modulus, residue, .. } => Check::Mod(*modulus, *residue),
                    _ => unreachable!("sequence atoms excluded"),
                })
                .collect(),
        })
        .collect();
    Some(Compiled {
        src: rule.src.clone(),
        len: rule.pattern.len(),
        checks,
    })
}

impl Compiled {
    fn matches(&self, path: &[u64]) -> bool {
        self.checks.iter().zip(path).all(|(cs, &x)| {
            cs.iter().all(|c| match *c {
                Check::Eq(v) => x == v,
                Check::Ge(v) => x >= v,
                Check::Le(v) => x <= v,
                Check::Mod(m, r) => x % m == r,
            })
        })
    }
}

/// Counts matching rules at every point with coordinates `< depth`,
/// independently of the symbolic decomposition. Sequence guards fall back
/// to ordinary rule matching.
pub fn brute_force(s: &SystemSpec, depth: u64) -> BruteForce {
    let compiled: Vec<Option<Compiled>> = s.rules.iter().map(compile).collect();
    let mut out = BruteForce::default();
    for t in s.space.trees() {
        for len in 0..=t.height {
            let cells: Vec<(usize, &Option<Compiled>)> = compiled
                .iter()
                .enumerate()
                .filter(|(i, c)| match c {
                    Some(c) => c.src == t.id && c.len == len,
                    None => s.rules[*i].src == t.id && s.rules[*i].pattern.len() == len,
                })
                .collect();
            let count = |path: &[u64]| -> usize {
                cells
                    .iter()
                    .filter(|(i, c)| match c {
                        Some(c) => c.matches(path),
                        None => s.rules[*i].matches(&Point::with_tree(t.id.clone(), path.to_vec()), &s.seqs),
                    })
                    .take(2)
                    .count()
            };
            let heads: Vec<u64> = if len == 0 { vec![0] } else { (0..depth).collect() };
            let per_head: Vec<(u64, Vec<Point>, Vec<Point>)> = heads
                .par_iter()
                .map(|&h| {
                    let mut n = 0u64;
                    let mut gaps = Vec::new();
                    let mut overlaps = Vec::new();
                    let values: Vec<u64> = (0..depth).collect();
                    let tail_len = len.saturating_sub(1);
                    let mut path = Vec::with_capacity(len);
                    for_each_path(&values, tail_len, |tail| {
                        path.clear();
                        if len > 0 {
                            path.push(h);
                        }
                        path.extend_from_slice(tail);
                        n += 1;
                        match count(&path) {
                            0 => gaps.push(Point::with_tree(t.id.clone(), path.clone())),
                            1 => {}
                            _ => overlaps.push(Point::with_tree(t.id.clone(), path.clone())),
                        }
                    });
                    (n, gaps, overlaps)
                })
                .collect();
            for (n, g, o) in per_head {
                out.points += n;
                out.gaps.extend(g);
                out.overlaps.extend(o);
            }
        }
    }
    out.gaps.sort_by_cached_key(|p| code_key(&s.space, p));
    out.overlaps.sort_by_cached_key(|p| code_key(&s.space, p));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_system;

    const SWAP2: &str = "system swap2 ordered
        space { tree A height 1 tree B height 1 }
        rules { rule A() -> B() rule B() -> A() rule A(n) -> B(n) rule B(n) -> A(n+1) }";

    #[test]
    fn swap2_exact() {
        let s = parse_system(SWAP2).unwrap();
        let r = validate_system(&s, 50);
        assert!(r.exact);
        assert!(r.is_valid());
        assert_eq!(r.to_string(), "valid: total, deterministic (exact)");
    }

    #[test]
    fn missing_rule_is_a_gap() {
        let src = SWAP2.replace("rule B(n) -> A(n+1)", "");
        let r = validate_system(&parse_system(&src).unwrap(), 50);
        assert!(!r.is_total());
        assert_eq!(r.gaps[0], Point::new("B", vec![0]));
    }

    #[test]
    fn overlaps_need_ordered() {
        let src = "system o space { tree A height 1 }
            rules { rule A() -> A() rule A(n) -> A(n) rule A(n | n % 2 == 0) -> A(0) }";
        let r = validate_system(&parse_system(src).unwrap(), 10);
        assert!(!r.is_deterministic());
        assert_eq!(r.overlaps[0].point, Point::new("A", vec![0]));
        let ordered = src.replace("system o", "system o ordered");
        assert!(validate_system(&parse_system(&ordered).unwrap(), 10).is_valid());
    }

    #[test]
    fn negative_images() {
        let src = "system n space { tree A height 1 }
            rules { rule A() -> A() rule A(n) -> A(n-1) }";
        let r = validate_system(&parse_system(src).unwrap(), 10);
        assert_eq!(r.negative.len(), 1);
        assert_eq!(r.negative[0].witness, Some(Point::new("A", vec![0])));
        let ok = "system n space { tree A height 1 }
            rules { rule A() -> A() rule A(0) -> A(0) rule A(n | n >= 1) -> A(n-1) }";
        assert!(validate_system(&parse_system(ok).unwrap(), 10).is_valid());
    }

    #[test]
    fn congruence_cells_decided_exactly() {
        // the residue 2 mod 3 class is missing beyond the threshold
        let src = "system c space { tree A height 1 }
            rules { rule A() -> A() rule A(n | n <= 4) -> A(n)
                    rule A(n | n >= 5, n % 3 == 0) -> A(n) rule A(n | n >= 5, n % 3 == 1) -> A(n) }";
        let s = parse_system(src).unwrap();
        let r = validate_system(&s, 3);
        assert!(r.exact);
        assert_eq!(r.gaps[0], Point::new("A", vec![5]));
        assert!(r.gaps.iter().all(|p| p.path()[0] % 3 == 2));
        let b = brute_force(&s, 40);
        assert_eq!(b.gaps.len(), (5..40).filter(|n| n % 3 == 2).count());
        assert!(b.overlaps.is_empty());
        assert_eq!(b.points, 41);
    }
}
