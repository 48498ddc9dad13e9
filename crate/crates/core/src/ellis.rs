//! The Ellis semigroup `E(X,f)`: its elements as natural powers and class
//! functions, the period spectrum, transitivity and the classification.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_integer::Integer;
use rayon::prelude::*;

use crate::dsl::{apply_map, apply_n, Atom, Entry, SystemSpec};
use crate::error::{Error, Result};
use crate::orbit::{analyze_orbit, family_index, omega_from, OrbitAnalysis, OrbitBounds};
use crate::piterate::{
    class_iterate, class_iterate_from, continuity_at, resolution_of, ContinuityMode, ContinuityVerdict, ResidueClass,
    SampleBounds, MODULUS_CAP,
};
use crate::space::{code_key, enumerate_truncation, Point};

/// An element of `E(X,f)`: `f^n`, or `f^p` for `p` in a residue class.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EllisElement {
    NatPower(u64),
    ClassFunction(ResidueClass),
}

impl fmt::Display for EllisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EllisElement::NatPower(n) => write!(f, "f^{n}"),
            EllisElement::ClassFunction(c) => write!(f, "f^({c})"),
        }
    }
}

/// `g(x)`.
pub fn evaluate(s: &SystemSpec, e: EllisElement, x: &Point, bounds: OrbitBounds) -> Result<Point> {
    match e {
        EllisElement::NatPower(n) => apply_n(s, x, n),
        EllisElement::ClassFunction(c) => class_value(&class_iterate(s, x, c, bounds)?, c),
    }
}

fn class_value(v: &crate::piterate::ClassIterateValue, c: ResidueClass) -> Result<Point> {
    v.single()
        .or_else(|| v.value_at(c.residue))
        .cloned()
        .ok_or_else(|| Error::Input(format!("no value on class {c}")))
}

/// Parameters shared by the semigroup analyses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EllisParams {
    pub depth: u64,
    pub horizon: u64,
    pub sample: SampleBounds,
}

impl Default for EllisParams {
    fn default() -> Self {
        Self {
            depth: 10,
            horizon: 200,
            sample: SampleBounds::default(),
        }
    }
}

impl EllisParams {
    fn bounds(&self) -> OrbitBounds {
        self.sample.orbit
    }
}

/// Orbit analyses of every point of a truncation, in truncation order.
#[derive(Clone, Debug)]
pub struct Survey {
    pub depth: u64,
    pub points: Vec<Point>,
    pub analyses: Vec<OrbitAnalysis>,
}

impl Survey {
    pub fn new(s: &SystemSpec, depth: u64, bounds: OrbitBounds) -> Result<Self> {
        let points = enumerate_truncation(&s.space, depth);
        let analyses = points
            .par_iter()
            .map(|p| analyze_orbit(s, p, bounds))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { depth, points, analyses })
    }

    fn iter(&self) -> impl Iterator<Item = (&Point, &OrbitAnalysis)> {
        self.points.iter().zip(&self.analyses)
    }

    fn first_undecided(&self) -> Option<&Point> {
        self.iter().find(|(_, a)| a.is_undecided()).map(|(p, _)| p)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpectrumBound {
    BoundedExact,
    /// A family of periodic points, e.g. `D(a(n))`, whose periods follow
    /// `period`, e.g. `n+2`.
    UnboundedWitness { family: String, period: String },
    UnknownBeyondBound,
}

/// The observed periods of periodic points, each with a periodic witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodSpectrum {
    pub periods: BTreeMap<u64, Point>,
    pub bound: SpectrumBound,
}

impl PeriodSpectrum {
    pub fn is_unbounded(&self) -> bool {
        matches!(self.bound, SpectrumBound::UnboundedWitness { .. })
    }
}

impl fmt::Display for PeriodSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ps: Vec<String> = self.periods.keys().map(u64::to_string).collect();
        write!(f, "periods={{{}}}", ps.join(","))?;
        match &self.bound {
            SpectrumBound::BoundedExact => f.write_str(" bounded"),
            SpectrumBound::UnboundedWitness { family, period } => {
                write!(f, " unbounded ({family} has period {period})")
            }
            SpectrumBound::UnknownBeyondBound => f.write_str(" unknown beyond bound"),
        }
    }
}

pub fn period_spectrum(s: &SystemSpec, depth: u64, bounds: OrbitBounds) -> Result<PeriodSpectrum> {
    spectrum_of(s, &Survey::new(s, depth, bounds)?, bounds)
}

fn spectrum_of(s: &SystemSpec, survey: &Survey, bounds: OrbitBounds) -> Result<PeriodSpectrum> {
    let mut periods: BTreeMap<u64, Point> = BTreeMap::new();
    for (_, a) in survey.iter() {
        if let OrbitAnalysis::Finite { n, cycle, .. } = a {
            let w = cycle
                .iter()
                .min_by_key(|p| code_key(&s.space, p))
                .expect("cycles are nonempty")
                .clone();
            let slot = periods.entry(*n as u64).or_insert_with(|| w.clone());
            if code_key(&s.space, &w) < code_key(&s.space, slot) {
                *slot = w;
            }
        }
    }
    let bound = if let Some((family, period)) = periodic_family(s, survey.depth, bounds, &mut periods)? {
        SpectrumBound::UnboundedWitness { family, period }
    } else if periods.keys().last().is_some_and(|&p| p >= bounds.period_bound as u64) {
        SpectrumBound::UnknownBeyondBound
    } else {
        SpectrumBound::BoundedExact
    };
    Ok(PeriodSpectrum { periods, bound })
}

fn offset_text(base: String, offset: i64) -> String {
    match offset {
        0 => base,
        o if o > 0 => format!("{base}+{o}"),
        o => format!("{base}{o}"),
    }
}

fn affine_text(slope: i64, intercept: i64) -> String {
    let lead = match slope {
        0 => return intercept.to_string(),
        1 => "n".to_string(),
        -1 => "-n".to_string(),
        c => format!("{c}n"),
    };
    offset_text(lead, intercept)
}

/// A rule whose cell is `{T(…, s(n)+o, …) : n}` with every other entry
/// constant, checked for strictly increasing periods on its first
/// `depth + 1` instances.
fn periodic_family(
    s: &SystemSpec,
    depth: u64,
    bounds: OrbitBounds,
    periods: &mut BTreeMap<u64, Point>,
) -> Result<Option<(String, String)>> {
    for (ri, rule) in s.rules.iter().enumerate() {
        let vars: Vec<(usize, &str)> = rule.pattern_vars().collect();
        let [(pos, var)] = vars[..] else { continue };
        let Some((seq, offset)) = rule.guard.iter().find_map(|a| match a {
            Atom::In { var: v, seq, binder: Some(_), offset } if v == var => Some((seq, *offset)),
            _ => None,
        }) else {
            continue;
        };
        let Some(decl) = s.seqs.iter().find(|d| d.name == *seq) else { continue };
        let mut instances: Vec<(u64, Point, u64)> = Vec::new();
        for n in 0..=depth + 64 {
            if instances.len() as u64 > depth {
                break;
            }
            let Some(v) = decl.value(n).and_then(|v| v.checked_add_signed(offset)) else { continue };
            let path = rule
                .pattern
                .iter()
                .enumerate()
                .map(|(i, e)| match e {
                    Entry::Const(c) => *c,
                    Entry::Var(_) => if i == pos { v } else { 0 },
                })
                .collect();
            let p = Point::new(&rule.src, path);
            if s.rule_index(&p) != Some(ri) {
                continue;
            }
            match analyze_orbit(s, &p, bounds)? {
                OrbitAnalysis::Finite { m: 0, n: period, .. } => instances.push((n, p, period as u64)),
                _ => break,
            }
        }
        if instances.len() < 3 || instances.len() as u64 <= depth.min(2) {
            continue;
        }
        if !instances.windows(2).all(|w| w[0].2 < w[1].2) {
            continue;
        }
        let (n0, _, p0) = instances[0];
        let (n1, _, p1) = instances[1];
        let rise = p1 as i64 - p0 as i64;
        let run = (n1 - n0) as i64;
        let period = if rise % run == 0
            && instances
                .iter()
                .all(|&(n, _, p)| p as i64 - p0 as i64 == rise / run * (n as i64 - n0 as i64))
        {
            affine_text(rise / run, p0 as i64 - rise / run * n0 as i64)
        } else {
            "increasing".to_string()
        };
        for (_, p, per) in &instances {
            periods.entry(*per).or_insert_with(|| p.clone());
        }
        let entries: Vec<String> = rule
            .pattern
            .iter()
            .map(|e| match e {
                Entry::Const(c) => c.to_string(),
                Entry::Var(_) => offset_text(format!("{seq}(n)"), offset),
            })
            .collect();
        return Ok(Some((format!("{}({})", rule.src, entries.join(",")), period)));
    }
    Ok(None)
}

/// What is known about `{f^n : n ∈ ℕ}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NatPowers {
    /// `f^0, …, f^horizon` pairwise distinct: `witness` has more than
    /// `horizon` points in its orbit.
    Distinct { horizon: u64, witness: Point },
    /// `f^index = f^(index+period)` everywhere.
    Repeating { index: u64, period: u64 },
    Unknown { horizon: u64 },
}

impl fmt::Display for NatPowers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NatPowers::Distinct { horizon, .. } => write!(f, "nat-powers distinct to {horizon}"),
            NatPowers::Repeating { index, period } => write!(f, "nat-powers f^{index}=f^{}", index + period),
            NatPowers::Unknown { horizon } => write!(f, "nat-powers unresolved to {horizon}"),
        }
    }
}

fn orbit_exceeds(a: &OrbitAnalysis, horizon: u64) -> bool {
    match a {
        OrbitAnalysis::Finite { m, n, .. } => (m + n) as u64 > horizon,
        OrbitAnalysis::LinearEscape { .. } => true,
        OrbitAnalysis::Undecided { steps } => *steps as u64 > horizon,
    }
}

/// Images of the rules when all of them are constant.
fn constant_range(s: &SystemSpec) -> Option<Vec<Point>> {
    let mut out: Vec<Point> = Vec::new();
    for r in &s.rules {
        let path = r
            .image
            .iter()
            .map(|e| e.constant_value().and_then(|c| u64::try_from(c).ok()))
            .collect::<Option<Vec<u64>>>()?;
        let p = Point::new(&r.dst, path);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    Some(out)
}

/// For a map with finite range `R`, `f^n` for `n ≥ 1` is determined by
/// `(f^{n-1}(r))_{r∈R}`; returns the first repetition of that tuple.
fn finite_powers(s: &SystemSpec, range: &[Point]) -> Result<Option<(u64, u64)>> {
    let mut seen: HashMap<Vec<Point>, u64> = HashMap::new();
    let mut t = range.to_vec();
    for n in 1..=10_000u64 {
        if let Some(&first) = seen.get(&t) {
            return Ok(Some((first, n - first)));
        }
        let next = t.iter().map(|p| apply_map(s, p)).collect::<Result<Vec<_>>>()?;
        seen.insert(std::mem::replace(&mut t, next), n);
    }
    Ok(None)
}

fn nat_powers(s: &SystemSpec, survey: &Survey, horizon: u64, bounds: OrbitBounds) -> Result<NatPowers> {
    if let Some(range) = constant_range(s) {
        if let Some((index, period)) = finite_powers(s, &range)? {
            return Ok(NatPowers::Repeating { index, period });
        }
    }
    if let Some((p, _)) = survey.iter().find(|(_, a)| orbit_exceeds(a, horizon)) {
        return Ok(NatPowers::Distinct {
            horizon,
            witness: p.clone(),
        });
    }
    let mut c = survey.depth.max(1) * 2;
    while c <= horizon * 4 {
        for t in s.space.trees() {
            let p = Point::new(&t.id, vec![c; t.height]);
            if orbit_exceeds(&analyze_orbit(s, &p, bounds)?, horizon) {
                return Ok(NatPowers::Distinct { horizon, witness: p });
            }
        }
        c *= 2;
    }
    Ok(NatPowers::Unknown { horizon })
}

/// The distinct class functions `F_l = f^p, p ∈ (Nℕ+l)*`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StarElements {
    Enumerated {
        modulus: u64,
        classes: Vec<ResidueClass>,
        /// For every pair `i < j`, a point where `F_i` and `F_j` differ.
        witnesses: Vec<(usize, usize, Point)>,
    },
    Undetermined { reason: String },
}

impl StarElements {
    pub fn classes(&self) -> Option<&[ResidueClass]> {
        match self {
            StarElements::Enumerated { classes, .. } => Some(classes),
            StarElements::Undetermined { .. } => None,
        }
    }
}

impl fmt::Display for StarElements {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StarElements::Enumerated { classes, .. } => {
                let cs: Vec<String> = classes.iter().map(ResidueClass::to_string).collect();
                write!(f, "star={} {{{}}}", classes.len(), cs.join(","))
            }
            StarElements::Undetermined { .. } => f.write_str("star=?"),
        }
    }
}

fn global_modulus(survey: &Survey) -> std::result::Result<u64, String> {
    let mut n = 1u64;
    for (p, a) in survey.iter() {
        let r = resolution_of(a).map_err(|_| format!("orbit of {p} undecided"))?;
        n = n.lcm(&r);
        if n > MODULUS_CAP {
            return Err(format!("global modulus above {MODULUS_CAP}"));
        }
    }
    Ok(n)
}

/// Values of `F_c` on the survey points.
fn class_values(survey: &Survey, c: ResidueClass) -> Result<Vec<Point>> {
    survey
        .analyses
        .iter()
        .map(|a| class_value(&class_iterate_from(a, c)?, c))
        .collect()
}

fn first_difference<'a>(survey: &'a Survey, a: &[Point], b: &[Point]) -> Option<&'a Point> {
    (0..a.len()).find(|&i| a[i] != b[i]).map(|i| &survey.points[i])
}

fn star_elements(survey: &Survey) -> Result<StarElements> {
    let modulus = match global_modulus(survey) {
        Ok(n) => n,
        Err(reason) => return Ok(StarElements::Undetermined { reason }),
    };
    let all: Vec<(ResidueClass, Vec<Point>)> = (0..modulus)
        .into_par_iter()
        .map(|l| {
            let c = ResidueClass::new(modulus, l)?;
            Ok((c, class_values(survey, c)?))
        })
        .collect::<Result<_>>()?;
    let mut kept: Vec<&(ResidueClass, Vec<Point>)> = Vec::new();
    for e in &all {
        if kept.iter().all(|k| k.1 != e.1) {
            kept.push(e);
        }
    }
    let mut witnesses = Vec::new();
    for i in 0..kept.len() {
        for j in i + 1..kept.len() {
            let w = first_difference(survey, &kept[i].1, &kept[j].1).expect("kept elements differ");
            witnesses.push((i, j, w.clone()));
        }
    }
    Ok(StarElements::Enumerated {
        modulus,
        classes: kept.iter().map(|k| k.0).collect(),
        witnesses,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EqualityVerdict {
    Equal,
    Distinct { witness: Point },
    EqualToDepth { depth: u64 },
}

impl fmt::Display for EqualityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EqualityVerdict::Equal => f.write_str("EQUAL"),
            EqualityVerdict::Distinct { witness } => write!(f, "DISTINCT witness={witness}"),
            EqualityVerdict::EqualToDepth { depth } => write!(f, "EQUAL_TO_DEPTH {depth}"),
        }
    }
}

/// Depth past which a sequence-free system repeats its guard pattern.
fn representative_depth(s: &SystemSpec) -> u64 {
    let l = s
        .rules
        .iter()
        .flat_map(|r| &r.guard)
        .filter_map(|a| match a {
            Atom::Mod { modulus, .. } => Some(*modulus),
            _ => None,
        })
        .fold(1u64, |acc, m| acc.lcm(&m));
    s.max_constant() + 1 + l
}

/// Compares two elements pointwise on a truncation, in truncation order.
pub fn elements_equal(
    s: &SystemSpec,
    e1: EllisElement,
    e2: EllisElement,
    depth: u64,
    bounds: OrbitBounds,
) -> Result<EqualityVerdict> {
    if e1 == e2 {
        return Ok(EqualityVerdict::Equal);
    }
    let exact = !s.uses_sequences();
    let depth = if exact { depth.max(representative_depth(s)) } else { depth };
    let mut complete = true;
    for p in enumerate_truncation(&s.space, depth) {
        match (evaluate(s, e1, &p, bounds), evaluate(s, e2, &p, bounds)) {
            (Ok(a), Ok(b)) if a != b => return Ok(EqualityVerdict::Distinct { witness: p }),
            (Ok(_), Ok(_)) => {}
            (Err(Error::Undecided { .. }), _) | (_, Err(Error::Undecided { .. })) => complete = false,
            (Err(e), _) | (_, Err(e)) => return Err(e),
        }
    }
    Ok(if exact && complete {
        EqualityVerdict::Equal
    } else {
        EqualityVerdict::EqualToDepth { depth }
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TransitivityVerdict {
    /// The orbit of `w` visits every isolated point of the truncation
    /// within `steps` steps.
    Transitive { w: Point, steps: u64 },
    NotTransitiveToDepth { depth: u64 },
    Undecided { reason: String },
}

impl TransitivityVerdict {
    pub fn witness(&self) -> Option<&Point> {
        match self {
            TransitivityVerdict::Transitive { w, .. } => Some(w),
            _ => None,
        }
    }

    pub fn keyword(&self) -> &'static str {
        match self {
            TransitivityVerdict::Transitive { .. } => "TRANSITIVE",
            TransitivityVerdict::NotTransitiveToDepth { .. } => "NOT_TRANSITIVE_TO_DEPTH",
            TransitivityVerdict::Undecided { .. } => "UNDECIDED",
        }
    }
}

impl fmt::Display for TransitivityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransitivityVerdict::Transitive { w, steps } => write!(f, "TRANSITIVE w={w} steps={steps}"),
            TransitivityVerdict::NotTransitiveToDepth { depth } => write!(f, "NOT_TRANSITIVE_TO_DEPTH {depth}"),
            TransitivityVerdict::Undecided { reason } => write!(f, "UNDECIDED ({reason})"),
        }
    }
}

/// Steps a concrete orbit walk may take.
fn walk_budget(bounds: OrbitBounds) -> u64 {
    20 * bounds.step_bound as u64
}

struct Walk {
    /// Step count after which every isolated target was visited.
    steps: Option<u64>,
    /// Visited points, in orbit order.
    trail: Vec<Point>,
    /// Internal targets approached by a visited descendant.
    approached: HashSet<Point>,
    /// The first revisited point, when the orbit closes up.
    repeat: Option<Point>,
}

/// Walks the orbit of `w` until it has visited every isolated target and
/// approached every internal one, closes up, meets `stop`, or runs out of
/// budget. A target `y` is approached by `z` below it with
/// `z[|y|] ≥ depth`.
fn walk(
    s: &SystemSpec,
    w: &Point,
    isolated: &HashSet<Point>,
    internal: &HashSet<Point>,
    depth: u64,
    budget: u64,
    stop: &HashSet<Point>,
) -> Result<Walk> {
    let mut seen: HashSet<Point> = HashSet::new();
    let mut trail = Vec::new();
    let mut approached = HashSet::new();
    let mut hit = 0usize;
    let mut steps = None;
    let mut p = w.clone();
    let mut repeat = None;
    for n in 0..budget {
        if steps.is_none() && hit == isolated.len() {
            steps = Some(n);
        }
        if steps.is_some() && approached.len() == internal.len() {
            break;
        }
        if n > 0 && stop.contains(&p) {
            break;
        }
        if !seen.insert(p.clone()) {
            repeat = Some(p);
            break;
        }
        if isolated.contains(&p) {
            hit += 1;
        }
        for d in 0..p.depth() {
            if p.path()[d] >= depth {
                let y = Point::new(p.tree(), p.path()[..d].to_vec());
                if internal.contains(&y) {
                    approached.insert(y);
                }
            }
        }
        let next = apply_map(s, &p)?;
        trail.push(std::mem::replace(&mut p, next));
    }
    if steps.is_none() && hit == isolated.len() {
        steps = Some(trail.len() as u64);
    }
    Ok(Walk {
        steps,
        trail,
        approached,
        repeat,
    })
}

/// First orbit index of `p` under a linear escape, if any.
fn escape_index(a: &OrbitAnalysis, p: &Point) -> Option<u64> {
    let OrbitAnalysis::LinearEscape { m, q, prefix, base, deltas, .. } = a else {
        return None;
    };
    if let Some(i) = prefix.iter().position(|x| x == p) {
        return Some(i as u64);
    }
    base.iter()
        .zip(deltas)
        .enumerate()
        .filter_map(|(r, (b, d))| family_index(b, d, p).map(|k| (m + r) as u64 + k * *q as u64))
        .min()
}

fn isolated_targets(s: &SystemSpec, survey: &Survey) -> HashSet<Point> {
    survey.points.iter().filter(|p| s.space.is_isolated(p)).cloned().collect()
}

fn internal_targets(s: &SystemSpec, survey: &Survey) -> HashSet<Point> {
    survey.points.iter().filter(|p| !s.space.is_isolated(p)).cloned().collect()
}

pub fn is_transitive(s: &SystemSpec, depth: u64, bounds: OrbitBounds) -> Result<TransitivityVerdict> {
    transitivity_of(s, &Survey::new(s, depth, bounds)?, bounds)
}

fn transitivity_of(s: &SystemSpec, survey: &Survey, bounds: OrbitBounds) -> Result<TransitivityVerdict> {
    let targets = isolated_targets(s, survey);
    let none = HashSet::new();
    let mut ruled_out: HashSet<Point> = HashSet::new();
    let mut walked: HashSet<Point> = HashSet::new();
    let mut undecided: Option<String> = None;
    for (w, a) in survey.iter().filter(|(p, _)| s.space.is_isolated(p)) {
        if ruled_out.contains(w) {
            continue;
        }
        if walked.contains(w) {
            undecided.get_or_insert_with(|| format!("orbit of {w} undecided"));
            continue;
        }
        match a {
            OrbitAnalysis::Finite { prefix, cycle, .. } => {
                ruled_out.extend(prefix.iter().chain(cycle).cloned());
            }
            OrbitAnalysis::LinearEscape { .. } => {
                let idx: Vec<Option<u64>> = targets.iter().map(|t| escape_index(a, t)).collect();
                if idx.iter().all(Option::is_some) {
                    let steps = idx.into_iter().flatten().max().map_or(0, |i| i + 1);
                    return Ok(TransitivityVerdict::Transitive { w: w.clone(), steps });
                }
                ruled_out.extend(targets.iter().zip(&idx).filter(|(_, i)| i.is_some()).map(|(t, _)| t.clone()));
            }
            OrbitAnalysis::Undecided { .. } => {
                let run = walk(s, w, &targets, &none, survey.depth, walk_budget(bounds), &walked)?;
                if let Some(steps) = run.steps {
                    return Ok(TransitivityVerdict::Transitive { w: w.clone(), steps });
                }
                walked.extend(run.trail);
                undecided.get_or_insert_with(|| format!("orbit of {w} undecided"));
            }
        }
    }
    Ok(match undecided {
        Some(reason) => TransitivityVerdict::Undecided { reason },
        None => TransitivityVerdict::NotTransitiveToDepth { depth: survey.depth },
    })
}

/// The hypothesis under which `h(f^p) = f^p(w)` was checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Hypothesis {
    AllIteratesContinuous,
    OmegaSingletons,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hypothesis::AllIteratesContinuous => "every f^p continuous",
            Hypothesis::OmegaSingletons => "|ω_f(x)|=1 on X'",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomeoVerdict {
    Verified { hypothesis: Hypothesis },
    Failed { witness: Point },
    PreconditionFailed { which: String },
}

impl HomeoVerdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, HomeoVerdict::Verified { .. })
    }
}

impl fmt::Display for HomeoVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomeoVerdict::Verified { hypothesis } => write!(f, "VERIFIED ({hypothesis})"),
            HomeoVerdict::Failed { witness } => write!(f, "FAILED witness={witness}"),
            HomeoVerdict::PreconditionFailed { which } => write!(f, "PRECONDITION_FAILED ({which})"),
        }
    }
}

/// The largest `|ω_f(x)|` over internal points of the survey.
fn omega_bound(s: &SystemSpec, survey: &Survey) -> Option<usize> {
    let mut m = 0;
    for (p, a) in survey.iter() {
        if !s.space.is_isolated(p) {
            m = m.max(omega_from(s, a).ok()?.len());
        }
    }
    Some(m)
}

fn hypothesis(s: &SystemSpec, survey: &Survey, sb: SampleBounds) -> Result<Option<Hypothesis>> {
    if omega_bound(s, survey) == Some(1) {
        return Ok(Some(Hypothesis::OmegaSingletons));
    }
    let mut n = 1u64;
    for (_, a) in survey.iter().filter(|(p, _)| !s.space.is_isolated(p)) {
        let Ok(r) = resolution_of(a) else { return Ok(None) };
        n = n.lcm(&r);
        if n > MODULUS_CAP {
            return Err(Error::ModulusTooLarge(n));
        }
    }
    for p in survey.points.iter().filter(|p| !s.space.is_isolated(p)) {
        for l in 0..n {
            let mode = ContinuityMode::Class(ResidueClass::new(n, l)?);
            if continuity_at(s, mode, p, sb)? != ContinuityVerdict::Continuous {
                return Ok(None);
            }
        }
    }
    Ok(Some(Hypothesis::AllIteratesContinuous))
}

pub fn homeomorphism_check(s: &SystemSpec, w: &Point, params: &EllisParams) -> Result<HomeoVerdict> {
    let survey = Survey::new(s, params.depth, params.bounds())?;
    let star = star_elements(&survey)?;
    let t = transitivity_of(s, &survey, params.bounds())?;
    homeomorphism_of(s, &survey, &star, &t, w, params)
}

fn homeomorphism_of(
    s: &SystemSpec,
    survey: &Survey,
    star: &StarElements,
    transitivity: &TransitivityVerdict,
    w: &Point,
    params: &EllisParams,
) -> Result<HomeoVerdict> {
    s.space.check(w)?;
    let fail = |which: &str| Ok(HomeoVerdict::PreconditionFailed { which: which.to_string() });
    if transitivity.witness().is_none() {
        return fail("not transitive");
    }
    let isolated = isolated_targets(s, survey);
    let internal = internal_targets(s, survey);
    let budget = walk_budget(params.bounds()).max(params.horizon + 1);
    let run = walk(s, w, &isolated, &HashSet::new(), survey.depth, budget, &HashSet::new())?;
    let Some(cover) = run.steps else {
        return fail("orbit of w not dense in the truncation");
    };
    let Some(hyp) = hypothesis(s, survey, params.sample)? else {
        return fail("neither every f^p continuous nor |ω_f(x)|=1 on X'");
    };
    let run = walk(
        s,
        w,
        &isolated,
        &internal,
        survey.depth,
        budget.max(params.horizon.max(cover) + 1),
        &HashSet::new(),
    )?;
    if let Some(p) = run.repeat {
        return Ok(HomeoVerdict::Failed { witness: p });
    }
    let orbit: HashSet<&Point> = run.trail.iter().collect();
    let mut values: Vec<Point> = Vec::new();
    if let Some(classes) = star.classes() {
        for &c in classes {
            match evaluate(s, EllisElement::ClassFunction(c), w, params.bounds()) {
                Ok(v) => {
                    if orbit.contains(&v) || values.contains(&v) {
                        return Ok(HomeoVerdict::Failed { witness: v });
                    }
                    values.push(v);
                }
                Err(Error::Undecided { .. }) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let mut missing: Vec<&Point> = internal
        .iter()
        .filter(|y| !run.approached.contains(*y) && !values.contains(y))
        .collect();
    missing.sort_by_key(|p| code_key(&s.space, p));
    if let Some(y) = missing.first() {
        return Ok(HomeoVerdict::Failed { witness: (*y).clone() });
    }
    Ok(HomeoVerdict::Verified { hypothesis: hyp })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    Finite { size: u64 },
    CountablyInfinite { star: usize, omega_bound: usize },
    HomeoToX { w: Point },
    CantorFlag { family: String, period: String },
    Undecided { reason: String },
}

impl Classification {
    pub fn keyword(&self) -> &'static str {
        match self {
            Classification::Finite { .. } => "FINITE",
            Classification::CountablyInfinite { .. } => "COUNTABLY_INFINITE",
            Classification::HomeoToX { .. } => "HOMEO_TO_X",
            Classification::CantorFlag { .. } => "CANTOR_FLAG",
            Classification::Undecided { .. } => "UNDECIDED",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ", self.keyword())?;
        match self {
            Classification::Finite { size } => write!(f, "(size {size})"),
            Classification::CountablyInfinite { star, omega_bound } => {
                write!(f, "(star {star}, |ω_f(x)|≤{omega_bound})")
            }
            Classification::HomeoToX { w } => write!(f, "(w={w})"),
            Classification::CantorFlag { period, .. } => write!(f, "(unbounded periods, witness period {period})"),
            Classification::Undecided { reason } => write!(f, "({reason})"),
        }
    }
}

/// Everything the enumeration established, with its certificates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EllisModel {
    pub depth: u64,
    pub spectrum: PeriodSpectrum,
    pub nat_powers: NatPowers,
    pub star: StarElements,
    pub transitivity: Option<TransitivityVerdict>,
    pub homeomorphism: Option<HomeoVerdict>,
    /// Whether `φ(g) = (g↾X', g(w))` separates the star elements, with
    /// `g(w)` dropped when no transitive `w` is known.
    pub phi_injective: Option<bool>,
    pub classification: Classification,
}

impl fmt::Display for EllisModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}; {}; classify={}", self.nat_powers, self.star, self.classification)
    }
}

fn finite_size(s: &SystemSpec, index: u64, period: u64) -> Result<u64> {
    let powers = index + period - 1;
    if s.space.is_infinite() {
        return Ok(powers + 1);
    }
    let pts = enumerate_truncation(&s.space, 0);
    for n in 1..=powers {
        if pts.iter().all(|p| apply_n(s, p, n).as_ref() == Ok(p)) {
            return Ok(powers);
        }
    }
    Ok(powers + 1)
}

fn phi_injective(s: &SystemSpec, survey: &Survey, star: &StarElements, w: Option<&Point>, bounds: OrbitBounds) -> Result<Option<bool>> {
    let Some(classes) = star.classes() else { return Ok(None) };
    let internal: Vec<usize> = (0..survey.points.len())
        .filter(|&i| !s.space.is_isolated(&survey.points[i]))
        .collect();
    let mut images: Vec<(Vec<Point>, Option<Point>)> = Vec::new();
    for &c in classes {
        let vals = class_values(survey, c)?;
        let restriction = internal.iter().map(|&i| vals[i].clone()).collect();
        let at_w = match w {
            Some(w) => Some(evaluate(s, EllisElement::ClassFunction(c), w, bounds)?),
            None => None,
        };
        images.push((restriction, at_w));
    }
    let distinct = (0..images.len()).all(|i| (i + 1..images.len()).all(|j| images[i] != images[j]));
    Ok(Some(distinct))
}

pub fn enumerate_ellis(s: &SystemSpec, params: &EllisParams) -> Result<EllisModel> {
    let bounds = params.bounds();
    let survey = Survey::new(s, params.depth, bounds)?;
    let spectrum = spectrum_of(s, &survey, bounds)?;
    let nat_powers = nat_powers(s, &survey, params.horizon, bounds)?;
    let mut model = EllisModel {
        depth: params.depth,
        spectrum,
        nat_powers,
        star: StarElements::Undetermined {
            reason: "unbounded periods".into(),
        },
        transitivity: None,
        homeomorphism: None,
        phi_injective: None,
        classification: Classification::Undecided { reason: String::new() },
    };
    if let NatPowers::Repeating { index, period } = model.nat_powers {
        model.star = star_elements(&survey)?;
        model.transitivity = Some(transitivity_of(s, &survey, bounds)?);
        model.classification = Classification::Finite {
            size: finite_size(s, index, period)?,
        };
        return Ok(model);
    }
    if let SpectrumBound::UnboundedWitness { family, period } = &model.spectrum.bound {
        model.classification = Classification::CantorFlag {
            family: family.clone(),
            period: period.clone(),
        };
        return Ok(model);
    }
    model.star = star_elements(&survey)?;
    let transitivity = transitivity_of(s, &survey, bounds)?;
    if let Some(w) = transitivity.witness() {
        let h = homeomorphism_of(s, &survey, &model.star, &transitivity, w, params)?;
        if h.is_verified() {
            model.classification = Classification::HomeoToX { w: w.clone() };
        }
        model.homeomorphism = Some(h);
    }
    model.phi_injective = phi_injective(s, &survey, &model.star, transitivity.witness(), bounds).or_else(|e| match e {
        Error::Undecided { .. } => Ok(None),
        e => Err(e),
    })?;
    model.transitivity = Some(transitivity);
    if model.classification.keyword() == "HOMEO_TO_X" {
        return Ok(model);
    }
    let omega = omega_bound(s, &survey);
    model.classification = match (&model.nat_powers, &model.star, omega, model.phi_injective) {
        (NatPowers::Distinct { .. }, StarElements::Enumerated { classes, .. }, Some(m), Some(true)) => {
            Classification::CountablyInfinite {
                star: classes.len(),
                omega_bound: m,
            }
        }
        (NatPowers::Unknown { horizon }, ..) => Classification::Undecided {
            reason: format!("no orbit longer than {horizon} found"),
        },
        (_, StarElements::Undetermined { reason }, ..) => Classification::Undecided { reason: reason.clone() },
        (_, _, None, _) => Classification::Undecided {
            reason: format!("orbit of {} undecided", survey.first_undecided().map_or("?".into(), |p| p.to_string())),
        },
        _ => Classification::Undecided {
            reason: "φ not injective on star elements".into(),
        },
    };
    Ok(model)
}

pub fn classify_semigroup(s: &SystemSpec, params: &EllisParams) -> Result<Classification> {
    Ok(enumerate_ellis(s, params)?.classification)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::builtins::builtin;

    fn class(n: u64, l: u64) -> EllisElement {
        EllisElement::ClassFunction(ResidueClass::new(n, l).unwrap())
    }

    #[test]
    fn spectra_of_small_builtins() {
        let b = OrbitBounds::default();
        let sp = period_spectrum(&builtin("swap2").unwrap(), 10, b).unwrap();
        assert_eq!(sp.periods.keys().copied().collect::<Vec<_>>(), vec![2]);
        assert_eq!(sp.bound, SpectrumBound::BoundedExact);
        let sp = period_spectrum(&builtin("collapse2").unwrap(), 10, b).unwrap();
        assert_eq!(sp.periods.keys().copied().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn swap2_elements() {
        let s = builtin("swap2").unwrap();
        let b = OrbitBounds::default();
        let a0 = Point::new("A", vec![0]);
        assert_eq!(
            elements_equal(&s, class(2, 0), class(2, 1), 10, b).unwrap(),
            EqualityVerdict::Distinct { witness: a0.clone() }
        );
        assert_eq!(
            elements_equal(&s, EllisElement::NatPower(2), class(2, 0), 10, b).unwrap(),
            EqualityVerdict::Distinct { witness: a0 }
        );
        assert_eq!(
            elements_equal(&s, EllisElement::NatPower(0), EllisElement::NatPower(0), 10, b).unwrap(),
            EqualityVerdict::Equal
        );
        assert_eq!(elements_equal(&s, class(2, 0), class(4, 2), 10, b).unwrap(), EqualityVerdict::Equal);
    }

    #[test]
    fn transitivity_verdicts() {
        let b = OrbitBounds::default();
        let t = is_transitive(&builtin("swap2").unwrap(), 10, b).unwrap();
        assert_eq!(t.witness(), Some(&Point::new("A", vec![0])));
        let t = is_transitive(&builtin("collapse2").unwrap(), 10, b).unwrap();
        assert_eq!(t, TransitivityVerdict::NotTransitiveToDepth { depth: 10 });
    }

    #[test]
    fn homeomorphism_preconditions() {
        let p = EllisParams {
            depth: 20,
            ..EllisParams::default()
        };
        let v = homeomorphism_check(&builtin("swap2").unwrap(), &Point::new("A", vec![0]), &p).unwrap();
        assert!(v.is_verified());
        let v = homeomorphism_check(&builtin("collapse2").unwrap(), &Point::new("A", vec![3]), &p).unwrap();
        assert_eq!(v.to_string(), "PRECONDITION_FAILED (not transitive)");
    }

    #[test]
    fn classification_lines() {
        let p = EllisParams::default();
        let m = enumerate_ellis(&builtin("swap2").unwrap(), &p).unwrap();
        assert_eq!(
            m.to_string(),
            "nat-powers distinct to 200; star=2 {2k+0,2k+1}; classify=HOMEO_TO_X (w=A(0))"
        );
        let c = classify_semigroup(&builtin("constant").unwrap(), &p).unwrap();
        assert_eq!(c, Classification::Finite { size: 2 });
    }
}
