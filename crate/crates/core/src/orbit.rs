//! Orbits of concrete points: finite orbits by cycle detection, infinite
//! orbits by linear escape, and the ω-limit sets and closures derived from
//! them.

use std::collections::HashMap;
use std::fmt;

use num_integer::Integer;

use crate::dsl::{apply_map_traced, Atom, Rule, SystemSpec, Term};
use crate::error::{Error, Result};
use crate::space::{code_key, Point};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OrbitBounds {
    pub step_bound: usize,
    pub period_bound: usize,
}

impl Default for OrbitBounds {
    fn default() -> Self {
        Self {
            step_bound: 10_000,
            period_bound: 64,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OrbitAnalysis {
    /// `x_m = x_{m+n}` with `m` and `n` minimal.
    Finite {
        m: usize,
        n: usize,
        prefix: Vec<Point>,
        cycle: Vec<Point>,
    },
    /// `x_{m+r+kq} = base[r] + k·deltas[r]` for all `k`, and
    /// `x_{m+r+kq} → limits[r]`.
    LinearEscape {
        m: usize,
        q: usize,
        prefix: Vec<Point>,
        base: Vec<Point>,
        deltas: Vec<Vec<u64>>,
        limits: Vec<Point>,
    },
    Undecided {
        steps: usize,
    },
}

impl OrbitAnalysis {
    pub fn is_undecided(&self) -> bool {
        matches!(self, OrbitAnalysis::Undecided { .. })
    }
}

fn list(points: &[Point]) -> String {
    let items: Vec<String> = points.iter().map(Point::to_string).collect();
    format!("[{}]", items.join(","))
}

impl fmt::Display for OrbitAnalysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrbitAnalysis::Finite { m, n, cycle, .. } => {
                write!(f, "finite m={m} n={n} cycle={}", list(cycle))
            }
            OrbitAnalysis::LinearEscape { m, q, limits, .. } => {
                write!(f, "escape m={m} q={q} limits={}", list(limits))
            }
            OrbitAnalysis::Undecided { steps } => write!(f, "undecided after {steps} steps"),
        }
    }
}

/// `p + k·delta` coordinatewise.
pub fn shifted(p: &Point, delta: &[u64], k: u64) -> Point {
    let path = p.path().iter().zip(delta).map(|(&c, &d)| c + k * d).collect();
    Point::new(p.tree(), path)
}

/// The smallest `k ≥ 0` with `base + k·delta = p`, if any.
pub fn family_index(base: &Point, delta: &[u64], p: &Point) -> Option<u64> {
    if base.tree() != p.tree() || base.depth() != p.depth() {
        return None;
    }
    let mut k: Option<u64> = None;
    for ((&b, &d), &c) in base.path().iter().zip(delta).zip(p.path()) {
        if d == 0 {
            if b != c {
                return None;
            }
            continue;
        }
        if c < b || (c - b) % d != 0 {
            return None;
        }
        let kk = (c - b) / d;
        if k.is_some_and(|k| k != kk) {
            return None;
        }
        k = Some(kk);
    }
    Some(k.unwrap_or(0))
}

/// The limit of `base + k·delta` as `k → ∞`: the prefix before the first
/// drifting coordinate.
pub fn drift_limit(base: &Point, delta: &[u64]) -> Point {
    let cut = delta.iter().position(|&d| d > 0).unwrap_or(delta.len());
    Point::new(base.tree(), base.path()[..cut].to_vec())
}

/// `x, f(x), …, f^{n-1}(x)`.
pub fn orbit_prefix(s: &SystemSpec, x: &Point, n: usize) -> Result<Vec<Point>> {
    let mut out = Vec::with_capacity(n);
    let mut p = x.clone();
    for _ in 0..n {
        let next = apply_map_traced(s, &p)?.1;
        out.push(std::mem::replace(&mut p, next));
    }
    Ok(out)
}

/// Window of drift indices after which every sequence-free guard is
/// periodic in `k` with period dividing the lcm of the moduli.
fn drift_window(s: &SystemSpec) -> u64 {
    let l = s
        .rules
        .iter()
        .flat_map(|r| &r.guard)
        .filter_map(|a| match a {
            Atom::Mod { modulus, .. } => Some(*modulus),
            _ => None,
        })
        .fold(1u64, |acc, m| acc.lcm(&m));
    s.max_constant() + 2 + l
}

/// Variables held constant along the family: pattern variables at
/// non-drifting positions, and binders of constant variables.
fn constant_vars<'a>(rule: &'a Rule, delta: &[u64]) -> Vec<&'a str> {
    let mut vars: Vec<&str> = rule
        .pattern_vars()
        .filter(|&(i, _)| delta[i] == 0)
        .map(|(_, v)| v)
        .collect();
    for a in &rule.guard {
        if let Some(b) = a.binder() {
            if vars.contains(&a.var()) {
                vars.push(b);
            }
        }
    }
    vars
}

/// Sequence atoms on drifting coordinates make the window argument unsound.
fn sequence_free_along(rule: &Rule, delta: &[u64]) -> bool {
    let constant = constant_vars(rule, delta);
    rule.guard
        .iter()
        .filter(|a| a.uses_sequence())
        .all(|a| constant.contains(&a.var()))
}

/// Image entries are affine in `k` when every sequence term and binder is
/// evaluated at a constant.
fn image_affine_along(rule: &Rule, delta: &[u64]) -> bool {
    let constant = constant_vars(rule, delta);
    let binders: Vec<&str> = rule.binders().collect();
    rule.image.iter().all(|e| {
        e.terms.iter().all(|t| match t {
            Term::Seq { var, .. } => constant.contains(&var.as_str()),
            Term::Var { var, .. } => !binders.contains(&var.as_str()) || constant.contains(&var.as_str()),
            Term::Const(_) => true,
        })
    })
}

/// Checks that `base + k·delta` is handled by rule `rule_idx` for every
/// `k ≥ 0` and is mapped onto `target + k·target_delta`.
pub(crate) fn verify_drift_step(
    s: &SystemSpec,
    rule_idx: usize,
    base: &Point,
    delta: &[u64],
    target: &Point,
    target_delta: &[u64],
) -> Result<bool> {
    let rule = &s.rules[rule_idx];
    let competitors = s
        .rules
        .iter()
        .filter(|r| *r.src == *base.tree() && r.pattern.len() == base.depth());
    for r in competitors {
        if !sequence_free_along(r, delta) {
            return Ok(false);
        }
    }
    if !image_affine_along(rule, delta) {
        return Ok(false);
    }
    for k in 0..drift_window(s) {
        let p = shifted(base, delta, k);
        let (i, img) = apply_map_traced(s, &p)?;
        if i != rule_idx || img != shifted(target, target_delta, k) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn delta_between(a: &Point, b: &Point) -> Option<Vec<u64>> {
    if a.tree() != b.tree() || a.depth() != b.depth() {
        return None;
    }
    a.path()
        .iter()
        .zip(b.path())
        .map(|(&x, &y)| y.checked_sub(x))
        .collect()
}

/// `xs[j] ≤ xs[j+q]` coordinatewise with the same step repeated once more.
fn same_step(xs: &[Point], j: usize, q: usize) -> bool {
    let (a, b, c) = (&xs[j], &xs[j + q], &xs[j + 2 * q]);
    a.tree() == b.tree()
        && b.tree() == c.tree()
        && a.depth() == b.depth()
        && b.depth() == c.depth()
        && a.path()
            .iter()
            .zip(b.path())
            .zip(c.path())
            .all(|((&x, &y), &z)| y >= x && z >= y && y - x == z - y)
}

fn try_escape(
    s: &SystemSpec,
    xs: &[Point],
    rules: &[usize],
    period_bound: usize,
) -> Result<Option<OrbitAnalysis>> {
    let len = xs.len();
    for q in 1..=period_bound {
        if 3 * q > len {
            break;
        }
        let mut start = len - 2 * q;
        while start > 0 && rules[start - 1] == rules[start - 1 + q] && rules[start - 1] == rules[start - 1 + 2 * q]
            && same_step(xs, start - 1, q)
        {
            start -= 1;
        }
        // the relation must persist to the end of the trajectory
        if start + 3 * q > len {
            continue;
        }
        let last = (len - 3 * q).min(start + 2 * q + drift_window(s) as usize);
        for m in start..=last {
            let deltas: Vec<Vec<u64>> = (m..m + q)
                .map(|j| delta_between(&xs[j], &xs[j + q]).unwrap_or_default())
                .collect();
            if deltas.iter().any(|d| d.iter().all(|&c| c == 0)) {
                continue;
            }
            let mut ok = true;
            for r in 0..q {
                let (target, target_delta) = if r + 1 < q {
                    (xs[m + r + 1].clone(), deltas[r + 1].clone())
                } else {
                    (xs[m + q].clone(), deltas[0].clone())
                };
                if !verify_drift_step(s, rules[m + r], &xs[m + r], &deltas[r], &target, &target_delta)? {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let base: Vec<Point> = xs[m..m + q].to_vec();
            let limits: Vec<Point> = base
                .iter()
                .zip(&deltas)
                .map(|(b, d)| drift_limit(b, d))
                .collect();
            for r in 0..q {
                if apply_map_traced(s, &limits[r])?.1 != limits[(r + 1) % q] {
                    return Ok(None);
                }
            }
            return Ok(Some(OrbitAnalysis::LinearEscape {
                m,
                q,
                prefix: xs[..m].to_vec(),
                base,
                deltas,
                limits,
            }));
        }
    }
    Ok(None)
}

/// Classifies the orbit of `x`.
pub fn analyze_orbit(s: &SystemSpec, x: &Point, bounds: OrbitBounds) -> Result<OrbitAnalysis> {
    s.space.check(x)?;
    let mut seen: HashMap<Point, usize> = HashMap::new();
    let mut xs: Vec<Point> = Vec::new();
    let mut rules: Vec<usize> = Vec::new();
    let mut p = x.clone();
    let mut checkpoint = 16;
    loop {
        if let Some(&m) = seen.get(&p) {
            return Ok(OrbitAnalysis::Finite {
                m,
                n: xs.len() - m,
                prefix: xs[..m].to_vec(),
                cycle: xs[m..].to_vec(),
            });
        }
        if xs.len() >= bounds.step_bound {
            if let Some(esc) = try_escape(s, &xs, &rules, bounds.period_bound)? {
                return Ok(esc);
            }
            return Ok(OrbitAnalysis::Undecided { steps: xs.len() });
        }
        let (rule, next) = apply_map_traced(s, &p)?;
        seen.insert(p.clone(), xs.len());
        xs.push(std::mem::replace(&mut p, next));
        rules.push(rule);
        if xs.len() == checkpoint {
            checkpoint *= 2;
            if let Some(esc) = try_escape(s, &xs, &rules, bounds.period_bound)? {
                return Ok(esc);
            }
        }
    }
}

/// `ω_f(x)` with a periodic generator `y` such that `ω_f(x) = O_f(y)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OmegaSet {
    pub points: Vec<Point>,
    pub generator: Option<Point>,
}

impl OmegaSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.points.contains(p)
    }
}

fn sorted_set(s: &SystemSpec, mut pts: Vec<Point>) -> Vec<Point> {
    pts.sort_by_cached_key(|p| code_key(&s.space, p));
    pts.dedup();
    pts
}

pub fn omega_from(s: &SystemSpec, a: &OrbitAnalysis) -> Result<OmegaSet> {
    match a {
        OrbitAnalysis::Finite { cycle, .. } => Ok(OmegaSet {
            points: sorted_set(s, cycle.clone()),
            generator: cycle.first().cloned(),
        }),
        OrbitAnalysis::LinearEscape { limits, .. } => Ok(OmegaSet {
            points: sorted_set(s, limits.clone()),
            generator: limits.first().cloned(),
        }),
        OrbitAnalysis::Undecided { steps } => Err(Error::Undecided { steps: *steps }),
    }
}

pub fn omega_limit(s: &SystemSpec, x: &Point, bounds: OrbitBounds) -> Result<OmegaSet> {
    omega_from(s, &analyze_orbit(s, x, bounds)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventuallyPeriodicData {
    pub m: usize,
    pub n: usize,
}

pub fn eventually_periodic_data(
    s: &SystemSpec,
    x: &Point,
    bounds: OrbitBounds,
) -> Result<EventuallyPeriodicData> {
    match analyze_orbit(s, x, bounds)? {
        OrbitAnalysis::Finite { m, n, .. } => Ok(EventuallyPeriodicData { m, n }),
        OrbitAnalysis::LinearEscape { .. } => Err(Error::NotEventuallyPeriodic(x.clone())),
        OrbitAnalysis::Undecided { steps } => Err(Error::Undecided { steps }),
    }
}

/// `O_f(x) ∪ ω_f(x)`, finitely described.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrbitClosure {
    /// The prefix, and for finite orbits the cycle.
    pub explicit: Vec<Point>,
    /// Drifting families `base + k·delta`, `k ≥ 0`.
    pub families: Vec<(Point, Vec<u64>)>,
    pub omega: OmegaSet,
}

impl OrbitClosure {
    pub fn contains(&self, p: &Point) -> bool {
        self.explicit.contains(p)
            || self.omega.contains(p)
            || self
                .families
                .iter()
                .any(|(b, d)| family_index(b, d, p).is_some())
    }

    /// The periodic points of the closure: the cycle or the limit cycle.
    pub fn periodic_points(&self) -> &[Point] {
        &self.omega.points
    }
}

pub fn closure_from(s: &SystemSpec, a: &OrbitAnalysis) -> Result<OrbitClosure> {
    let omega = omega_from(s, a)?;
    Ok(match a {
        OrbitAnalysis::Finite { prefix, cycle, .. } => OrbitClosure {
            explicit: prefix.iter().chain(cycle).cloned().collect(),
            families: Vec::new(),
            omega,
        },
        OrbitAnalysis::LinearEscape {
            prefix,
            base,
            deltas,
            ..
        } => OrbitClosure {
            explicit: prefix.clone(),
            families: base.iter().cloned().zip(deltas.iter().cloned()).collect(),
            omega,
        },
        OrbitAnalysis::Undecided { .. } => unreachable!("omega_from rejects undecided orbits"),
    })
}

pub fn orbit_closure(s: &SystemSpec, x: &Point, bounds: OrbitBounds) -> Result<OrbitClosure> {
    closure_from(s, &analyze_orbit(s, x, bounds)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::builtins::builtin;

    fn pt(s: &str) -> Point {
        Point::parse(s).unwrap()
    }

    #[test]
    fn swap2_escapes() {
        let s = builtin("swap2").unwrap();
        let a = analyze_orbit(&s, &pt("A(0)"), OrbitBounds::default()).unwrap();
        assert_eq!(a.to_string(), "escape m=0 q=2 limits=[A(),B()]");
        match a {
            OrbitAnalysis::LinearEscape { deltas, .. } => assert_eq!(deltas, vec![vec![1], vec![1]]),
            _ => unreachable!(),
        }
        assert_eq!(
            omega_limit(&s, &pt("A(0)"), OrbitBounds::default()).unwrap().points,
            vec![pt("A()"), pt("B()")]
        );
        assert!(matches!(
            eventually_periodic_data(&s, &pt("A(0)"), OrbitBounds::default()),
            Err(Error::NotEventuallyPeriodic(_))
        ));
    }

    #[test]
    fn collapse_orbits() {
        let s = builtin("collapse2").unwrap();
        let a = analyze_orbit(&s, &pt("A(1)"), OrbitBounds::default()).unwrap();
        assert_eq!(a.to_string(), "finite m=2 n=1 cycle=[A(0)]");
        let d = eventually_periodic_data(&s, &pt("A(1)"), OrbitBounds::default()).unwrap();
        assert_eq!((d.m, d.n), (2, 1));
        let b = builtin("collapse2b").unwrap();
        let d = eventually_periodic_data(&b, &pt("A(1)"), OrbitBounds::default()).unwrap();
        assert_eq!((d.m, d.n), (3, 2));
        let c = orbit_closure(&s, &pt("A(3)"), OrbitBounds::default()).unwrap();
        assert!(c.contains(&pt("A(0)")));
        let c = orbit_closure(&s, &pt("A(1)"), OrbitBounds::default()).unwrap();
        assert_eq!(c.explicit, vec![pt("A(1)"), pt("B(0)"), pt("A(0)")]);
    }

    #[test]
    fn fixed_internal_point() {
        let s = builtin("omega3_transitive").unwrap();
        let a = analyze_orbit(&s, &pt("D(0)"), OrbitBounds::default()).unwrap();
        assert_eq!(a.to_string(), "finite m=0 n=1 cycle=[D(0)]");
        assert_eq!(
            omega_limit(&s, &pt("D(1,2)"), OrbitBounds::default()).unwrap().points,
            vec![pt("D(0)")]
        );
    }

    #[test]
    fn dense_orbit_is_undecided() {
        let s = builtin("omega3_transitive").unwrap();
        let bounds = OrbitBounds {
            step_bound: 2000,
            period_bound: 16,
        };
        let a = analyze_orbit(&s, &pt("D(0,0,0)"), bounds).unwrap();
        assert_eq!(a, OrbitAnalysis::Undecided { steps: 2000 });
        assert_eq!(
            orbit_closure(&s, &pt("D(0,0,0)"), bounds).unwrap_err(),
            Error::Undecided { steps: 2000 }
        );
    }

    #[test]
    fn family_arithmetic() {
        let b = pt("D(1,2,3)");
        assert_eq!(family_index(&b, &[0, 2, 1], &pt("D(1,8,6)")), Some(3));
        assert_eq!(family_index(&b, &[0, 2, 1], &pt("D(1,8,7)")), None);
        assert_eq!(drift_limit(&b, &[0, 2, 1]), pt("D(1)"));
        assert_eq!(shifted(&b, &[0, 2, 1], 2), pt("D(1,6,5)"));
    }
}
