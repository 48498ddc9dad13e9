//! Iterates `f^p` for `p` ranging over a residue class `(Nℕ+l)*`, their
//! continuity at accumulation points, and the discontinuity criteria.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;

use crate::dsl::{apply_map, apply_map_traced, eval_guard, Atom, Entry, Env, SystemSpec};
use crate::error::{Error, Result};
use crate::orbit::{analyze_orbit, closure_from, OrbitAnalysis, OrbitBounds};
use crate::space::{code_key, EscapeFamily, NeighborhoodDepth, NodeTemplate, Point, Slot, DIVERGENT_VAR};

/// Largest modulus a class iterate is refined to.
pub const MODULUS_CAP: u64 = 1_000_000;

/// The free ultrafilters concentrating on `Nℕ+l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResidueClass {
    pub modulus: u64,
    pub residue: u64,
}

impl ResidueClass {
    pub fn new(modulus: u64, residue: u64) -> Result<Self> {
        if modulus == 0 || residue >= modulus {
            return Err(Error::Input(format!("invalid residue class {modulus}k+{residue}")));
        }
        Ok(Self { modulus, residue })
    }

    /// `1k+0`, all of `ℕ*`.
    pub fn all() -> Self {
        Self {
            modulus: 1,
            residue: 0,
        }
    }

    pub fn contains(&self, n: u64) -> bool {
        n % self.modulus == self.residue
    }

    /// The classes mod `m` inside `self`; `self.modulus` must divide `m`.
    pub fn refine(&self, m: u64) -> Vec<ResidueClass> {
        debug_assert_eq!(m % self.modulus, 0);
        (0..m / self.modulus)
            .map(|j| ResidueClass {
                modulus: m,
                residue: self.residue + j * self.modulus,
            })
            .collect()
    }
}

impl fmt::Display for ResidueClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}k+{}", self.modulus, self.residue)
    }
}

impl FromStr for ResidueClass {
    type Err = Error;

    /// Parses `Nk+l`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Input(format!("malformed residue class `{s}` (expected Nk+l)"));
        let (n, l) = s.trim().split_once("k+").ok_or_else(bad)?;
        let n: u64 = n.trim().parse().map_err(|_| bad())?;
        let l: u64 = l.trim().parse().map_err(|_| bad())?;
        ResidueClass::new(n, l)
    }
}

/// `f^p(x)` for `p` in each class of a refinement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassIterateValue {
    pub values: Vec<(ResidueClass, Point)>,
}

impl ClassIterateValue {
    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0].1 == w[1].1)
    }

    /// The common value when the map is constant on the queried class.
    pub fn single(&self) -> Option<&Point> {
        if self.is_constant() {
            self.values.first().map(|(_, p)| p)
        } else {
            None
        }
    }

    pub fn modulus(&self) -> u64 {
        self.values.iter().map(|(c, _)| c.modulus).max().unwrap_or(1)
    }

    /// The value on the refined class containing `n`.
    pub fn value_at(&self, n: u64) -> Option<&Point> {
        self.values.iter().find(|(c, _)| c.contains(n)).map(|(_, p)| p)
    }
}

/// Period of the eventual behaviour of an analysed orbit.
pub fn resolution_of(a: &OrbitAnalysis) -> Result<u64> {
    match a {
        OrbitAnalysis::Finite { n, .. } => Ok(*n as u64),
        OrbitAnalysis::LinearEscape { q, .. } => Ok(*q as u64),
        OrbitAnalysis::Undecided { steps } => Err(Error::Undecided { steps: *steps }),
    }
}

pub fn resolution_modulus(s: &SystemSpec, x: &Point, bounds: OrbitBounds) -> Result<u64> {
    resolution_of(&analyze_orbit(s, x, bounds)?)
}

/// `f^p(x)` for every `p ≡ l` modulo a multiple of the resolution.
fn value_in_class(a: &OrbitAnalysis, l: u64) -> Result<Point> {
    match a {
        OrbitAnalysis::Finite { m, n, cycle, .. } => {
            Ok(cycle[(l as i64 - *m as i64).rem_euclid(*n as i64) as usize].clone())
        }
        OrbitAnalysis::LinearEscape { m, q, limits, .. } => {
            Ok(limits[(l as i64 - *m as i64).rem_euclid(*q as i64) as usize].clone())
        }
        OrbitAnalysis::Undecided { steps } => Err(Error::Undecided { steps: *steps }),
    }
}

pub fn class_iterate_from(a: &OrbitAnalysis, c: ResidueClass) -> Result<ClassIterateValue> {
    let res = resolution_of(a)?;
    let m = c.modulus.lcm(&res);
    if m > MODULUS_CAP {
        return Err(Error::ModulusTooLarge(m));
    }
    let values = c
        .refine(m)
        .into_iter()
        .map(|rc| Ok((rc, value_in_class(a, rc.residue)?)))
        .collect::<Result<Vec<_>>>()?;
    let v = ClassIterateValue { values };
    Ok(match v.single() {
        Some(p) => ClassIterateValue {
            values: vec![(c, p.clone())],
        },
        None => v,
    })
}

/// `f^p(x)` for `p ∈ c`, from the orbit formulas.
pub fn class_iterate(
    s: &SystemSpec,
    x: &Point,
    c: ResidueClass,
    bounds: OrbitBounds,
) -> Result<ClassIterateValue> {
    class_iterate_from(&analyze_orbit(s, x, bounds)?, c)
}

/// Brute-force check that `f^{kN+l}(x)` eventually stays in every
/// neighbourhood `V_cut(claimed)` with `cut ≤ n_nbhd`, for 51 consecutive
/// `k` starting at some `K0 ≤ horizon`.
pub fn progression_oracle(
    s: &SystemSpec,
    x: &Point,
    c: ResidueClass,
    claimed: &Point,
    n_nbhd: u64,
    horizon: u64,
) -> Result<bool> {
    const RUN: u64 = 51;
    let mut p = x.clone();
    for _ in 0..c.residue {
        p = apply_map(s, &p)?;
    }
    let total = horizon + RUN;
    let mut ys = Vec::with_capacity(total as usize);
    for _ in 0..total {
        ys.push(p.clone());
        for _ in 0..c.modulus {
            p = apply_map(s, &p)?;
        }
    }
    for cut in 0..=n_nbhd {
        let v = NeighborhoodDepth::new(claimed.clone(), cut);
        let mut run = 0u64;
        let mut ok = false;
        for (k, y) in ys.iter().enumerate() {
            if v.contains(y) {
                run += 1;
                if run >= RUN && (k as u64 + 1 - RUN) <= horizon {
                    ok = true;
                    break;
                }
            } else {
                run = 0;
            }
        }
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Which map is probed for continuity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ContinuityMode {
    /// `f` itself.
    BaseMap,
    /// `f^p` for `p` in the class.
    Class(ResidueClass),
}

impl fmt::Display for ContinuityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContinuityMode::BaseMap => f.write_str("base"),
            ContinuityMode::Class(c) => write!(f, "class {c}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ContinuityVerdict {
    Continuous,
    Discontinuous {
        witness: EscapeFamily,
        limit: Point,
        expected: Point,
        /// The refined class on which the jump occurs.
        subclass: Option<ResidueClass>,
    },
    Undecided {
        reason: String,
    },
}

impl ContinuityVerdict {
    pub fn is_continuous(&self) -> bool {
        matches!(self, ContinuityVerdict::Continuous)
    }

    pub fn is_discontinuous(&self) -> bool {
        matches!(self, ContinuityVerdict::Discontinuous { .. })
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            ContinuityVerdict::Continuous => "CONTINUOUS",
            ContinuityVerdict::Discontinuous { .. } => "DISCONTINUOUS",
            ContinuityVerdict::Undecided { .. } => "UNDECIDED",
        }
    }
}

/// `D(t,0,0)`: the family template without its guard.
pub fn family_shape(fam: &EscapeFamily) -> String {
    NodeTemplate {
        tree: fam.tree().into(),
        slots: fam.slots().to_vec(),
    }
    .to_string()
}

impl fmt::Display for ContinuityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ContinuityVerdict::Continuous => f.write_str("CONTINUOUS"),
            ContinuityVerdict::Discontinuous {
                witness,
                limit,
                expected,
                ..
            } => write!(
                f,
                "DISCONTINUOUS witness={} limit={limit} expected={expected}",
                family_shape(witness)
            ),
            ContinuityVerdict::Undecided { reason } => write!(f, "UNDECIDED ({reason})"),
        }
    }
}

/// Sampling parameters for family analyses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleBounds {
    /// Number of divergent-index samples per family.
    pub samples: usize,
    /// Fixed auxiliary values tried per auxiliary, besides the diagonal.
    pub aux_values: usize,
    pub orbit: OrbitBounds,
}

impl Default for SampleBounds {
    fn default() -> Self {
        Self {
            samples: 25,
            aux_values: 2,
            orbit: OrbitBounds::default(),
        }
    }
}

/// The cell of one rule under an accumulation point, as an escape family.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CellFamily {
    pub rule: usize,
    pub family: EscapeFamily,
}

/// Atoms reachable from `var` through binders.
fn atoms_in_scope(guard: &[Atom], var: &str) -> Vec<Atom> {
    let mut scope = vec![var.to_string()];
    let mut out: Vec<Atom> = Vec::new();
    let mut grew = true;
    while grew {
        grew = false;
        for a in guard {
            if scope.iter().any(|v| v == a.var()) && !out.contains(a) {
                out.push(a.clone());
                if let Some(b) = a.binder() {
                    scope.push(b.to_string());
                }
                grew = true;
            }
        }
    }
    out
}

fn admits(s: &SystemSpec, atoms: &[Atom], var: &str, v: u64) -> bool {
    let mut env = Env::default();
    env.set(var, v);
    eval_guard(atoms, &mut env, &s.seqs).unwrap_or(false)
}

/// The first `count` values `≥ from` admitted by the guard atoms on `var`.
fn admissible(s: &SystemSpec, guard: &[Atom], var: &str, from: u64, count: usize) -> Vec<u64> {
    let atoms = atoms_in_scope(guard, var);
    (from..from + 20_000)
        .filter(|&v| admits(s, &atoms, var, v))
        .take(count)
        .collect()
}

/// Families of rule cells populating the children of `a`: the child index
/// at depth `|a|` diverges, deeper entries are auxiliaries.
pub fn families_under(s: &SystemSpec, a: &Point) -> Vec<CellFamily> {
    let d = a.depth();
    let mut out = Vec::new();
    for (ri, r) in s.rules.iter().enumerate() {
        if *r.src != *a.tree() || r.pattern.len() <= d {
            continue;
        }
        let Entry::Var(tvar) = &r.pattern[d] else {
            continue;
        };
        // prefix entries must agree with a
        let mut env = Env::default();
        let mut ok = true;
        for (e, &c) in r.pattern[..d].iter().zip(a.path()) {
            match e {
                Entry::Const(k) => ok &= *k == c,
                Entry::Var(v) => env.set(v, c),
            }
        }
        if !ok {
            continue;
        }
        let prefix_vars: Vec<&str> = r.pattern[..d]
            .iter()
            .filter_map(|e| match e {
                Entry::Var(v) => Some(v.as_str()),
                Entry::Const(_) => None,
            })
            .collect();
        let prefix_atoms: Vec<Atom> = prefix_vars
            .iter()
            .flat_map(|v| atoms_in_scope(&r.guard, v))
            .collect();
        if !eval_guard(&prefix_atoms, &mut env, &s.seqs).unwrap_or(false) {
            continue;
        }
        let t_atoms = atoms_in_scope(&r.guard, tvar);
        let bounded = t_atoms.iter().any(|a| matches!(a, Atom::Le(v, _) if v == tvar));
        if bounded {
            continue;
        }
        let rename = |a: &Atom| {
            let a = if a.var() == DIVERGENT_VAR || a.binder() == Some(DIVERGENT_VAR) {
                a.rename(DIVERGENT_VAR, "t_")
            } else {
                a.clone()
            };
            a.rename(tvar, DIVERGENT_VAR)
        };
        let mut slots = Vec::new();
        let mut guard: Vec<Atom> = t_atoms.iter().map(rename).collect();
        for (i, e) in r.pattern.iter().enumerate().skip(d) {
            slots.push(match e {
                Entry::Const(c) => Slot::Fixed(*c),
                Entry::Var(_) if i == d => Slot::Divergent,
                Entry::Var(v) => {
                    guard.extend(atoms_in_scope(&r.guard, v).iter().map(rename));
                    Slot::Aux(if v == DIVERGENT_VAR { "t_".to_string() } else { v.clone() })
                }
            });
        }
        let mut full = a.path().iter().map(|&c| Slot::Fixed(c)).collect::<Vec<_>>();
        full.extend(slots);
        if let Ok(family) = EscapeFamily::with_guard(r.src.clone(), full, guard) {
            out.push(CellFamily { rule: ri, family });
        }
    }
    out
}

/// One sampled sequence inside a family: a fixed choice for the
/// auxiliaries (or the diagonal) and the members for increasing `t`.
struct SampleRun {
    /// The family with fixed auxiliaries substituted; diagonal auxiliaries
    /// stay symbolic.
    witness: EscapeFamily,
    members: Vec<Point>,
}

fn sample_runs(s: &SystemSpec, cell: Option<usize>, fam: &EscapeFamily, sb: SampleBounds) -> Vec<SampleRun> {
    let start = s.max_constant() + 1;
    let ts = admissible(s, &fam.guard, DIVERGENT_VAR, start, sb.samples);
    let aux = fam.aux_names();
    // per auxiliary: fixed values, then None for the diagonal
    let mut choices: Vec<Vec<Option<u64>>> = Vec::new();
    for v in &aux {
        let mut c: Vec<Option<u64>> = admissible(s, &fam.guard, v, 0, sb.aux_values)
            .into_iter()
            .map(Some)
            .collect();
        c.push(None);
        choices.push(c);
    }
    let mut combos: Vec<Vec<Option<u64>>> = vec![Vec::new()];
    for c in &choices {
        combos = combos
            .into_iter()
            .flat_map(|prefix| {
                c.iter().map(move |x| {
                    let mut p = prefix.clone();
                    p.push(*x);
                    p
                })
            })
            .collect();
    }
    let mut runs = Vec::new();
    for combo in combos {
        let mut members = Vec::new();
        for &t in &ts {
            let mut vals = HashMap::new();
            let mut ok = true;
            for (name, choice) in aux.iter().zip(&combo) {
                let v = match choice {
                    Some(v) => Some(*v),
                    None => admissible(s, &fam.guard, name, t, 1).first().copied(),
                };
                match v {
                    Some(v) => {
                        vals.insert(name.to_string(), v);
                    }
                    None => ok = false,
                }
            }
            if !ok {
                continue;
            }
            let p = fam.instance(t, &vals);
            if let Some(ri) = cell {
                match apply_map_traced(s, &p) {
                    Ok((i, _)) if i == ri => {}
                    _ => continue,
                }
            }
            members.push(p);
        }
        if members.len() < 4 {
            continue;
        }
        let slots = fam
            .slots()
            .iter()
            .map(|sl| match sl {
                Slot::Aux(v) => {
                    let i = aux.iter().position(|a| a == v).expect("aux listed");
                    match combo[i] {
                        Some(c) => Slot::Fixed(c),
                        None => sl.clone(),
                    }
                }
                _ => sl.clone(),
            })
            .collect();
        let witness = EscapeFamily::with_guard(fam.tree().into(), slots, fam.guard.clone())
            .expect("divergent slot kept");
        runs.push(SampleRun { witness, members });
    }
    runs
}

/// The limit of a sampled sequence of points, when its shape is uniform:
/// constant, or constant up to one coordinate that strictly increases.
fn trend(values: &[&Point]) -> Option<Point> {
    let first = values[0];
    if values.iter().all(|v| *v == first) {
        return Some(first.clone());
    }
    if values
        .iter()
        .any(|v| v.tree() != first.tree() || v.depth() != first.depth())
    {
        return None;
    }
    let j = (0..first.depth()).find(|&j| values.iter().any(|v| v.path()[j] != first.path()[j]))?;
    if values.windows(2).all(|w| w[0].path()[j] < w[1].path()[j]) {
        Some(Point::new(first.tree(), first.path()[..j].to_vec()))
    } else {
        None
    }
}

/// Limits of the stride subsequences of `values`, for the smallest stride
/// `≤ 4` under which every subsequence is uniform.
fn stride_limits(values: &[Point]) -> Option<Vec<Point>> {
    'stride: for stride in 1..=4usize {
        let mut limits = Vec::new();
        for o in 0..stride {
            let sub: Vec<&Point> = values.iter().skip(o).step_by(stride).collect();
            if sub.len() < 3 {
                return None;
            }
            match trend(&sub) {
                Some(l) => limits.push(l),
                None => continue 'stride,
            }
        }
        limits.dedup();
        return Some(limits);
    }
    None
}

enum FamilyOutcome {
    Agrees,
    Jumps {
        witness: EscapeFamily,
        limit: Point,
        expected: Point,
        subclass: Option<ResidueClass>,
    },
    Undecided(String),
}

fn value_map(s: &SystemSpec, x: &Point, mode: ContinuityMode, bounds: OrbitBounds) -> Result<Option<ClassIterateValue>> {
    match mode {
        ContinuityMode::BaseMap => Ok(Some(ClassIterateValue {
            values: vec![(ResidueClass::all(), apply_map(s, x)?)],
        })),
        ContinuityMode::Class(c) => {
            let a = analyze_orbit(s, x, bounds)?;
            if a.is_undecided() {
                return Ok(None);
            }
            match class_iterate_from(&a, c) {
                Ok(v) => Ok(Some(v)),
                Err(Error::ModulusTooLarge(_)) => Ok(None),
                Err(e) => Err(e),
            }
        }
    }
}

/// Refinement cap used when comparing iterates across samples.
const SAMPLE_MODULUS_CAP: u64 = 10_000;

fn probe_family(
    s: &SystemSpec,
    mode: ContinuityMode,
    expected: &ClassIterateValue,
    run: &SampleRun,
    bounds: OrbitBounds,
) -> Result<FamilyOutcome> {
    let mut vals = Vec::with_capacity(run.members.len());
    for p in &run.members {
        match value_map(s, p, mode, bounds)? {
            Some(v) => vals.push(v),
            None => {
                return Ok(FamilyOutcome::Undecided(format!(
                    "orbit of {p} in {} undecided",
                    family_shape(&run.witness)
                )))
            }
        }
    }
    let base = match mode {
        ContinuityMode::BaseMap => ResidueClass::all(),
        ContinuityMode::Class(c) => c,
    };
    let mut m = expected.modulus().lcm(&base.modulus);
    for v in &vals {
        m = m.lcm(&v.modulus());
        if m > SAMPLE_MODULUS_CAP {
            return Ok(FamilyOutcome::Undecided(format!("modulus above {SAMPLE_MODULUS_CAP}")));
        }
    }
    for rc in base.refine(m) {
        let seq: Vec<Point> = vals
            .iter()
            .map(|v| v.value_at(rc.residue).expect("refinement covers").clone())
            .collect();
        let want = expected.value_at(rc.residue).expect("refinement covers").clone();
        let Some(limits) = stride_limits(&seq) else {
            return Ok(FamilyOutcome::Undecided(format!(
                "{} is not uniform in t",
                family_shape(&run.witness)
            )));
        };
        if let Some(l) = limits.into_iter().find(|l| *l != want) {
            return Ok(FamilyOutcome::Jumps {
                witness: run.witness.clone(),
                limit: l,
                expected: want,
                subclass: (m > base.modulus).then_some(rc),
            });
        }
    }
    Ok(FamilyOutcome::Agrees)
}

/// Continuity of `f` or of the class iterates at the accumulation point `a`.
pub fn continuity_at(s: &SystemSpec, mode: ContinuityMode, a: &Point, sb: SampleBounds) -> Result<ContinuityVerdict> {
    s.space.check(a)?;
    if s.space.is_isolated(a) {
        return Err(Error::Precondition(format!("{a} is isolated")));
    }
    let Some(expected) = value_map(s, a, mode, sb.orbit)? else {
        return Ok(ContinuityVerdict::Undecided {
            reason: format!("orbit of {a} undecided"),
        });
    };
    let mut undecided = None;
    for cf in families_under(s, a) {
        for run in sample_runs(s, Some(cf.rule), &cf.family, sb) {
            match probe_family(s, mode, &expected, &run, sb.orbit)? {
                FamilyOutcome::Agrees => {}
                FamilyOutcome::Jumps {
                    witness,
                    limit,
                    expected,
                    subclass,
                } => {
                    return Ok(ContinuityVerdict::Discontinuous {
                        witness,
                        limit,
                        expected,
                        subclass,
                    })
                }
                FamilyOutcome::Undecided(r) => {
                    undecided.get_or_insert(r);
                }
            }
        }
    }
    Ok(match undecided {
        Some(reason) => ContinuityVerdict::Undecided { reason },
        None => ContinuityVerdict::Continuous,
    })
}

/// Every accumulation point is fixed: each rule on internal points is an
/// identity on its cell.
pub fn accumulation_points_fixed(s: &SystemSpec) -> bool {
    s.rules.iter().all(|r| {
        let h = s.space.height(&r.src).unwrap_or(0);
        r.pattern.len() >= h || r.is_syntactic_identity()
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum T36Verdict {
    AllContinuous,
    AllDiscontinuous { b: Point, family: EscapeFamily },
    Undecided { reason: String },
}

impl fmt::Display for T36Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            T36Verdict::AllContinuous => f.write_str("ALL_CONTINUOUS"),
            T36Verdict::AllDiscontinuous { b, family } => {
                write!(f, "ALL_DISCONTINUOUS b={b} family={}", family_shape(family))
            }
            T36Verdict::Undecided { reason } => write!(f, "UNDECIDED ({reason})"),
        }
    }
}

/// Periodic points common to the orbit closures of every member of each
/// stride subsequence.
fn common_periodic(s: &SystemSpec, members: &[Point], a: &Point, bounds: OrbitBounds) -> Result<Option<Vec<Point>>> {
    let mut sets = Vec::with_capacity(members.len());
    for p in members {
        let an = analyze_orbit(s, p, bounds)?;
        if an.is_undecided() {
            return Ok(None);
        }
        sets.push(closure_from(s, &an)?.omega.points);
    }
    let mut found = Vec::new();
    for stride in 1..=4usize {
        for o in 0..stride {
            let sub: Vec<&Vec<Point>> = sets.iter().skip(o).step_by(stride).collect();
            if sub.len() < 3 {
                continue;
            }
            for b in sub[0] {
                if b != a && sub.iter().all(|set| set.contains(b)) && !found.contains(b) {
                    found.push(b.clone());
                }
            }
        }
    }
    found.sort_by_cached_key(|p| code_key(&s.space, p));
    Ok(Some(found))
}

/// Whether all iterates are continuous at `a`, for systems whose
/// accumulation points are all fixed.
pub fn t36_classify(s: &SystemSpec, a: &Point, sb: SampleBounds) -> Result<T36Verdict> {
    if !accumulation_points_fixed(s) {
        return Err(Error::Precondition("some accumulation point is not fixed".into()));
    }
    s.space.check(a)?;
    if s.space.is_isolated(a) {
        return Err(Error::Precondition(format!("{a} is isolated")));
    }
    let mut undecided = None;
    for cf in families_under(s, a) {
        for run in sample_runs(s, Some(cf.rule), &cf.family, sb) {
            match common_periodic(s, &run.members, a, sb.orbit)? {
                None => {
                    undecided.get_or_insert_with(|| format!("undecided orbit in {}", family_shape(&run.witness)));
                }
                Some(bs) => {
                    if let Some(b) = bs.into_iter().next() {
                        return Ok(T36Verdict::AllDiscontinuous { b, family: run.witness });
                    }
                }
            }
        }
    }
    if let Some(reason) = undecided {
        return Ok(T36Verdict::Undecided { reason });
    }
    if s.uses_sequences() {
        return Ok(T36Verdict::Undecided {
            reason: "family enumeration is not exact with sequence guards".into(),
        });
    }
    Ok(T36Verdict::AllContinuous)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum T39Verdict {
    DiscontinuousAll,
    HypothesisFails { which: String },
}

impl fmt::Display for T39Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            T39Verdict::DiscontinuousAll => f.write_str("DISCONTINUOUS_ALL"),
            T39Verdict::HypothesisFails { which } => write!(f, "HYPOTHESIS_FAILS ({which})"),
        }
    }
}

/// Internal points of the truncation whose orbit is not purely periodic.
fn non_periodic_internal(s: &SystemSpec, depth: u64, bounds: OrbitBounds) -> Result<Option<Point>> {
    for p in crate::space::enumerate_truncation(&s.space, depth) {
        if s.space.is_isolated(&p) {
            continue;
        }
        match analyze_orbit(s, &p, bounds)? {
            OrbitAnalysis::Finite { m: 0, .. } => {}
            _ => return Ok(Some(p)),
        }
    }
    Ok(None)
}

/// The sufficient condition for every `f^p` to be discontinuous at `a`:
/// `b` periodic, `b ∉ O_f(a)`, and `b` in the orbit closure of every
/// member of a family converging to `a`.
pub fn t39_sufficient(
    s: &SystemSpec,
    a: &Point,
    b: &Point,
    family: &EscapeFamily,
    sb: SampleBounds,
) -> Result<T39Verdict> {
    if let Some(p) = non_periodic_internal(s, 6, sb.orbit)? {
        return Err(Error::Precondition(format!("accumulation point {p} is not periodic")));
    }
    family.check(&s.space)?;
    let limit = crate::space::limit_of_family(family);
    if limit.point().as_ref() != Some(a) {
        return Err(Error::NotAFamily(format!("{family} does not converge to {a}")));
    }
    let fails = |which: &str| {
        Ok(T39Verdict::HypothesisFails {
            which: which.to_string(),
        })
    };
    match analyze_orbit(s, b, sb.orbit)? {
        OrbitAnalysis::Finite { m: 0, .. } => {}
        _ => return fails("b periodic"),
    }
    let orbit_a = analyze_orbit(s, a, sb.orbit)?;
    if orbit_a.is_undecided() {
        return Err(Error::Undecided {
            steps: sb.orbit.step_bound,
        });
    }
    let ca = closure_from(s, &orbit_a)?;
    if ca.explicit.contains(b) || ca.families.iter().any(|(base, d)| crate::orbit::family_index(base, d, b).is_some()) {
        return fails("b ∉ O_f(a)");
    }
    let runs = sample_runs(s, None, family, sb);
    if runs.is_empty() {
        return Err(Error::NotAFamily(format!("{family} has no admissible members")));
    }
    for run in runs {
        for p in &run.members {
            let an = analyze_orbit(s, p, sb.orbit)?;
            if an.is_undecided() {
                return Err(Error::Undecided {
                    steps: sb.orbit.step_bound,
                });
            }
            if !closure_from(s, &an)?.contains(b) {
                return fails("b in every orbit closure");
            }
        }
    }
    Ok(T39Verdict::DiscontinuousAll)
}
