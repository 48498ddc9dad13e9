//! Commands and the reports they produce, rendered as text or as
//! `key=value` records.

use std::fmt;
use std::str::FromStr;

use crate::dsl::builtins::load;
use crate::dsl::{validate_system, SystemSpec, ValidationReport};
use crate::ellis::{enumerate_ellis, evaluate, is_transitive, EllisElement, EllisModel, EllisParams, NatPowers, SpectrumBound};
use crate::error::{Error, Result};
use crate::orbit::{analyze_orbit, omega_limit, OrbitBounds};
use crate::piterate::{
    accumulation_points_fixed, class_iterate, continuity_at, progression_oracle, resolution_modulus, t36_classify,
    ContinuityMode, ContinuityVerdict, ResidueClass, SampleBounds, T36Verdict,
};
use crate::space::{enumerate_truncation, Point};

pub const DEFAULT_DEPTH: u64 = 10;
pub const DEFAULT_HORIZON: u64 = 200;
pub const DEFAULT_ORACLE_HORIZON: u64 = 10_000;
pub const DEFAULT_VALIDATION_DEPTH: u64 = 30;
pub const DEFAULT_ORACLE_NEIGHBORHOOD: u64 = 15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verb {
    Validate,
    Orbit,
    Omega,
    Iterate,
    Continuity,
    Ellis,
    Transitivity,
    Report,
    Oracle,
}

impl FromStr for Verb {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "validate" => Verb::Validate,
            "orbit" => Verb::Orbit,
            "omega" => Verb::Omega,
            "iterate" => Verb::Iterate,
            "continuity" => Verb::Continuity,
            "ellis" => Verb::Ellis,
            "transitivity" => Verb::Transitivity,
            "report" => Verb::Report,
            "oracle" => Verb::Oracle,
            _ => return Err(Error::Input(format!("unknown verb `{s}`"))),
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Text,
    Lines,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(Format::Text),
            "lines" => Ok(Format::Lines),
            _ => Err(Error::Input(format!("unknown format `{s}` (expected text or lines)"))),
        }
    }
}

/// A parsed invocation. `None` options take the documented defaults.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Command {
    pub verb: Verb,
    /// `builtin:NAME` or a path to a `.dsk` file.
    pub system: String,
    pub point: Option<String>,
    /// `Nk+l`, or a natural number for a plain power.
    pub class: Option<String>,
    pub depth: Option<u64>,
    pub horizon: Option<u64>,
    pub bounds: OrbitBounds,
    pub format: Format,
}

impl Command {
    pub fn new(verb: Verb, system: &str) -> Self {
        Self {
            verb,
            system: system.to_string(),
            point: None,
            class: None,
            depth: None,
            horizon: None,
            bounds: OrbitBounds::default(),
            format: Format::Text,
        }
    }

    pub fn with_point(mut self, p: &str) -> Self {
        self.point = Some(p.to_string());
        self
    }

    pub fn with_class(mut self, c: &str) -> Self {
        self.class = Some(c.to_string());
        self
    }

    pub fn with_depth(mut self, d: u64) -> Self {
        self.depth = Some(d);
        self
    }

    pub fn with_format(mut self, f: Format) -> Self {
        self.format = f;
        self
    }
}

/// One verdict: a stable `key=value` record and its human rendering.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub key: String,
    pub value: String,
    pub text: Option<String>,
}

impl Record {
    fn new(key: impl Into<String>, value: impl ToString) -> Self {
        Self {
            key: key.into(),
            value: value.to_string(),
            text: None,
        }
    }

    fn shown(key: impl Into<String>, value: impl ToString, text: impl Into<String>) -> Self {
        Self {
            key: key.into(),
            value: value.to_string(),
            text: Some(text.into()),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub header: Vec<Record>,
    pub records: Vec<Record>,
    pub error: Option<String>,
    pub exit_code: i32,
}

/// Exit codes: success, input error, failed precondition, failed verdict.
pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;
pub const EXIT_VERDICT: i32 = 3;

fn exit_code_of(e: &Error) -> i32 {
    match e {
        Error::Precondition(_)
        | Error::CoverageGap(_)
        | Error::DerivedNotInvariant { .. }
        | Error::NotEventuallyPeriodic(_)
        | Error::ModulusTooLarge(_)
        | Error::NotAFamily(_) => EXIT_PRECONDITION,
        _ => EXIT_INPUT,
    }
}

pub fn render_report(r: &Report, format: Format) -> String {
    let mut out = String::new();
    for rec in r.header.iter().chain(&r.records) {
        match format {
            Format::Lines => out.push_str(&format!("{}={}\n", rec.key, rec.value)),
            Format::Text => {
                if let Some(t) = &rec.text {
                    out.push_str(t);
                    out.push('\n');
                }
            }
        }
    }
    if let Some(e) = &r.error {
        match format {
            Format::Lines => out.push_str(&format!("error={e}\n")),
            Format::Text => out.push_str(&format!("error: {e}\n")),
        }
    }
    out
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_report(self, Format::Text))
    }
}

/// Parses one `key=value` record.
pub fn parse_record(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    (!k.is_empty() && !k.contains(char::is_whitespace)).then_some((k, v))
}

pub fn run_command(c: &Command) -> Report {
    let mut r = Report::default();
    if let Err(e) = run(c, &mut r) {
        r.exit_code = exit_code_of(&e);
        r.error = Some(e.to_string());
    }
    r
}

fn run(c: &Command, r: &mut Report) -> Result<()> {
    let s = load(&c.system)?;
    let point = c.point.as_deref().map(|p| s.space.parse_point(p)).transpose()?;
    let class = c.class.as_deref().map(parse_class).transpose()?;
    let v = validate_system(&s, DEFAULT_VALIDATION_DEPTH);
    r.header.push(Record::shown("system", &s.name, format!("system: {}", s.name)));
    r.header.push(Record::shown(
        "validation",
        if v.is_valid() { "valid" } else { "invalid" },
        format!("validation: {v}"),
    ));
    r.header.push(Record::new("validation.mode", validation_mode(&v)));
    if c.verb == Verb::Validate {
        validation_records(&v, r);
        if !v.is_valid() {
            r.exit_code = EXIT_VERDICT;
        }
        return Ok(());
    }
    if !v.is_valid() {
        return Err(Error::Precondition(format!("system {} is not valid", s.name)));
    }
    let need = |what: &str| Error::Input(format!("--{what} is required"));
    let sb = SampleBounds {
        orbit: c.bounds,
        ..SampleBounds::default()
    };
    let params = EllisParams {
        depth: c.depth.unwrap_or(DEFAULT_DEPTH),
        horizon: c.horizon.unwrap_or(DEFAULT_HORIZON),
        sample: sb,
    };
    match c.verb {
        Verb::Validate => unreachable!("handled above"),
        Verb::Orbit => {
            let x = point.ok_or_else(|| need("point"))?;
            let a = analyze_orbit(&s, &x, c.bounds)?;
            r.records.push(Record::shown(format!("orbit.{x}"), &a, format!("orbit of {x}: {a}")));
        }
        Verb::Omega => {
            let x = point.ok_or_else(|| need("point"))?;
            match omega_limit(&s, &x, c.bounds) {
                Ok(o) => {
                    let pts: Vec<String> = o.points.iter().map(Point::to_string).collect();
                    r.records.push(Record::shown(
                        format!("omega.{x}"),
                        format!("{{{}}}", pts.join(",")),
                        format!("ω({x}) = {{{}}}", pts.join(", ")),
                    ));
                }
                Err(Error::Undecided { steps }) => r.records.push(undecided(format!("omega.{x}"), steps)),
                Err(e) => return Err(e),
            }
        }
        Verb::Iterate => {
            let x = point.ok_or_else(|| need("point"))?;
            iterate_records(&s, &x, class.ok_or_else(|| need("class"))?, c.bounds, r)?;
        }
        Verb::Continuity => {
            let x = point.ok_or_else(|| need("point"))?;
            let modes = match class {
                Some(EllisElement::ClassFunction(k)) => vec![ContinuityMode::Class(k)],
                Some(EllisElement::NatPower(1)) => vec![ContinuityMode::BaseMap],
                Some(EllisElement::NatPower(_)) => {
                    return Err(Error::Input("continuity takes a class Nk+l or 1".into()))
                }
                None => default_modes(&s, &x, c.bounds)?,
            };
            for m in modes {
                continuity_records(&s, &x, m, sb, r)?;
            }
            if class.is_none() && accumulation_points_fixed(&s) {
                t36_records(&s, &x, sb, r)?;
            }
        }
        Verb::Ellis => {
            let m = enumerate_ellis(&s, &params)?;
            ellis_records(&m, r);
        }
        Verb::Transitivity => {
            let t = is_transitive(&s, params.depth, c.bounds)?;
            transitivity_records(&t, r);
        }
        Verb::Oracle => {
            let x = point.ok_or_else(|| need("point"))?;
            let Some(EllisElement::ClassFunction(k)) = class else {
                return Err(Error::Input("oracle takes --class Nk+l".into()));
            };
            let horizon = c.horizon.unwrap_or(DEFAULT_ORACLE_HORIZON);
            let v = class_iterate(&s, &x, k, c.bounds)?;
            for (sub, claimed) in &v.values {
                let ok = progression_oracle(&s, &x, *sub, claimed, DEFAULT_ORACLE_NEIGHBORHOOD, horizon)?;
                let verdict = if ok { "PASS" } else { "FAIL" };
                r.records.push(Record::shown(
                    format!("oracle.{x}.{sub}"),
                    verdict,
                    format!("oracle f^({sub})({x}) = {claimed}: {verdict}"),
                ));
                if !ok {
                    r.exit_code = EXIT_VERDICT;
                }
            }
        }
        Verb::Report => full_report(&s, &v, &params, r)?,
    }
    Ok(())
}

/// `Nk+l`, or a bare natural number for a plain power.
pub fn parse_class(s: &str) -> Result<EllisElement> {
    match s.trim().parse::<u64>() {
        Ok(n) => Ok(EllisElement::NatPower(n)),
        Err(_) => Ok(EllisElement::ClassFunction(s.parse()?)),
    }
}

fn undecided(key: String, steps: usize) -> Record {
    Record::shown(key.clone(), "UNDECIDED", format!("{key}: undecided after {steps} steps"))
}

fn validation_mode(v: &ValidationReport) -> String {
    if v.exact {
        "exact".into()
    } else {
        "depth".into()
    }
}

fn validation_records(v: &ValidationReport, r: &mut Report) {
    r.records.push(Record::new("validation.depth", v.depth));
    r.records.push(Record::new("validation.gaps", v.gaps.len()));
    r.records.push(Record::new("validation.overlaps", v.overlaps.len()));
    r.records.push(Record::new("validation.negative", v.negative.len()));
    if let Some(g) = v.gaps.first() {
        r.records.push(Record::new("validation.gap", g));
    }
}

fn iterate_records(s: &SystemSpec, x: &Point, e: EllisElement, bounds: OrbitBounds, r: &mut Report) -> Result<()> {
    match e {
        EllisElement::NatPower(_) => {
            let y = evaluate(s, e, x, bounds)?;
            r.records.push(Record::shown(format!("iterate.{x}.{e}"), &y, format!("{e}({x}) = {y}")));
        }
        EllisElement::ClassFunction(k) => match class_iterate(s, x, k, bounds) {
            Ok(v) => {
                for (c, y) in &v.values {
                    r.records.push(Record::shown(format!("iterate.{x}.{c}"), y, format!("f^({c})({x}) = {y}")));
                }
            }
            Err(Error::Undecided { steps }) => r.records.push(undecided(format!("iterate.{x}.{k}"), steps)),
            Err(e) => return Err(e),
        },
    }
    Ok(())
}

/// The base map and every class modulo the resolution of the point.
fn default_modes(s: &SystemSpec, x: &Point, bounds: OrbitBounds) -> Result<Vec<ContinuityMode>> {
    let n = match resolution_modulus(s, x, bounds) {
        Ok(n) => n,
        Err(Error::Undecided { .. }) => 1,
        Err(e) => return Err(e),
    };
    let mut out = vec![ContinuityMode::BaseMap];
    for l in 0..n {
        out.push(ContinuityMode::Class(ResidueClass::new(n, l)?));
    }
    Ok(out)
}

fn mode_key(m: ContinuityMode) -> String {
    match m {
        ContinuityMode::BaseMap => "base".into(),
        ContinuityMode::Class(c) => c.to_string(),
    }
}

fn continuity_records(s: &SystemSpec, x: &Point, m: ContinuityMode, sb: SampleBounds, r: &mut Report) -> Result<()> {
    let v = continuity_at(s, m, x, sb)?;
    let key = format!("continuity.{x}.{}", mode_key(m));
    let map = match m {
        ContinuityMode::BaseMap => "f".to_string(),
        ContinuityMode::Class(c) => format!("f^({c})"),
    };
    r.records.push(Record::shown(key.clone(), v.keyword(), format!("continuity of {map} at {x}: {v}")));
    match &v {
        ContinuityVerdict::Discontinuous {
            witness,
            limit,
            expected,
            subclass,
        } => {
            r.records.push(Record::new(format!("{key}.witness"), crate::piterate::family_shape(witness)));
            r.records.push(Record::new(format!("{key}.limit"), limit));
            r.records.push(Record::new(format!("{key}.expected"), expected));
            if let Some(c) = subclass {
                r.records.push(Record::new(format!("{key}.subclass"), c));
            }
        }
        ContinuityVerdict::Undecided { reason } => r.records.push(Record::new(format!("{key}.reason"), reason)),
        ContinuityVerdict::Continuous => {}
    }
    Ok(())
}

fn t36_records(s: &SystemSpec, x: &Point, sb: SampleBounds, r: &mut Report) -> Result<()> {
    let v = t36_classify(s, x, sb)?;
    let key = format!("t36.{x}");
    let word = match &v {
        T36Verdict::AllContinuous => "ALL_CONTINUOUS",
        T36Verdict::AllDiscontinuous { .. } => "ALL_DISCONTINUOUS",
        T36Verdict::Undecided { .. } => "UNDECIDED",
    };
    r.records.push(Record::shown(key.clone(), word, format!("iterates at {x}: {v}")));
    if let T36Verdict::AllDiscontinuous { b, family } = &v {
        r.records.push(Record::new(format!("{key}.b"), b));
        r.records.push(Record::new(format!("{key}.family"), crate::piterate::family_shape(family)));
    }
    Ok(())
}

fn transitivity_records(t: &crate::ellis::TransitivityVerdict, r: &mut Report) {
    r.records.push(Record::shown("transitivity", t.keyword(), format!("transitivity: {t}")));
    if let crate::ellis::TransitivityVerdict::Transitive { w, steps } = t {
        r.records.push(Record::new("transitivity.w", w));
        r.records.push(Record::new("transitivity.steps", steps));
    }
}

fn ellis_records(m: &EllisModel, r: &mut Report) {
    let periods: Vec<String> = m.spectrum.periods.keys().map(u64::to_string).collect();
    r.records.push(Record::shown("periods", periods.join(","), format!("period spectrum: {}", m.spectrum)));
    let bound = match &m.spectrum.bound {
        SpectrumBound::BoundedExact => "BOUNDED_EXACT".to_string(),
        SpectrumBound::UnboundedWitness { .. } => "UNBOUNDED_WITNESS".to_string(),
        SpectrumBound::UnknownBeyondBound => "UNKNOWN_BEYOND_BOUND".to_string(),
    };
    r.records.push(Record::new("periods.bound", bound));
    if let SpectrumBound::UnboundedWitness { family, period } = &m.spectrum.bound {
        r.records.push(Record::new("periods.family", family));
        r.records.push(Record::new("periods.expression", period));
    }
    if let Some(t) = &m.transitivity {
        transitivity_records(t, r);
    }
    if let Some(h) = &m.homeomorphism {
        r.records.push(Record::shown("homeomorphism", keyword_of(h), format!("homeomorphism: {h}")));
    }
    let nat = match &m.nat_powers {
        NatPowers::Distinct { .. } => "DISTINCT",
        NatPowers::Repeating { .. } => "REPEATING",
        NatPowers::Unknown { .. } => "UNKNOWN",
    };
    r.records.push(Record::new("ellis.nat_powers", nat));
    match m.star.classes() {
        Some(cs) => {
            let names: Vec<String> = cs.iter().map(ResidueClass::to_string).collect();
            r.records.push(Record::new("star", cs.len()));
            r.records.push(Record::new("star.classes", names.join(",")));
        }
        None => r.records.push(Record::new("star", "?")),
    }
    if let Some(phi) = m.phi_injective {
        r.records.push(Record::new("phi_injective", phi));
    }
    r.records.push(Record::shown("classify", m.classification.keyword(), format!("ellis: {m}")));
}

fn keyword_of(h: &crate::ellis::HomeoVerdict) -> &'static str {
    match h {
        crate::ellis::HomeoVerdict::Verified { .. } => "VERIFIED",
        crate::ellis::HomeoVerdict::Failed { .. } => "FAILED",
        crate::ellis::HomeoVerdict::PreconditionFailed { .. } => "PRECONDITION_FAILED",
    }
}

/// Every analysis, followed by a comparison with the `expect` block.
fn full_report(s: &SystemSpec, v: &ValidationReport, params: &EllisParams, r: &mut Report) -> Result<()> {
    let m = enumerate_ellis(s, params)?;
    ellis_records(&m, r);
    for x in enumerate_truncation(&s.space, 1) {
        if s.space.is_isolated(&x) {
            continue;
        }
        let modes = match m.star.classes() {
            Some(cs) => std::iter::once(ContinuityMode::BaseMap)
                .chain(cs.iter().map(|&c| ContinuityMode::Class(c)))
                .collect(),
            None => default_modes(s, &x, params.sample.orbit)?,
        };
        for mode in modes {
            continuity_records(s, &x, mode, params.sample, r)?;
        }
    }
    let transitive = m.transitivity.as_ref().map(|t| match t {
        crate::ellis::TransitivityVerdict::Transitive { .. } => "true",
        crate::ellis::TransitivityVerdict::NotTransitiveToDepth { .. } => "false",
        crate::ellis::TransitivityVerdict::Undecided { .. } => "undecided",
    });
    let star = m.star.classes().map(|c| c.len().to_string());
    let mut mismatches = 0;
    for (key, want) in &s.expect {
        let got = match key.as_str() {
            "valid" => Some(if v.is_valid() { validation_mode(v) } else { "invalid".into() }),
            "transitive" => transitive.map(str::to_string),
            "star" => star.clone(),
            "classify" => Some(m.classification.keyword().to_string()),
            _ => None,
        };
        let (value, text) = match got {
            Some(g) if g == *want => ("ok".to_string(), format!("expect {key} = {want}: ok")),
            Some(g) => {
                mismatches += 1;
                (format!("MISMATCH got {g}"), format!("expect {key} = {want}: MISMATCH (got {g})"))
            }
            None => {
                mismatches += 1;
                ("MISMATCH not computed".into(), format!("expect {key} = {want}: MISMATCH (not computed)"))
            }
        };
        r.records.push(Record::shown(format!("expect.{key}"), value, text));
    }
    if mismatches > 0 {
        r.exit_code = EXIT_VERDICT;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn iterate_swap2_odd_class() {
        let c = Command::new(Verb::Iterate, "builtin:swap2").with_point("A(3)").with_class("2k+1");
        let r = run_command(&c);
        assert_eq!(r.exit_code, 0);
        assert!(render_report(&r, Format::Text).lines().any(|l| l == "f^(2k+1)(A(3)) = B()"));
    }

    #[test]
    fn validate_swap2() {
        let r = run_command(&Command::new(Verb::Validate, "builtin:swap2"));
        assert!(r.to_string().contains("valid: total, deterministic (exact)"));
    }

    #[test]
    fn lines_round_trip() {
        let c = Command::new(Verb::Report, "builtin:swap2").with_format(Format::Lines);
        let r = run_command(&c);
        let out = render_report(&r, Format::Lines);
        assert!(out.lines().any(|l| l == "classify=HOMEO_TO_X"));
        for (line, rec) in out.lines().zip(r.header.iter().chain(&r.records)) {
            assert_eq!(parse_record(line), Some((rec.key.as_str(), rec.value.as_str())));
        }
        assert_eq!(r.exit_code, 0, "{out}");
    }

    #[test]
    fn input_errors() {
        let r = run_command(&Command::new(Verb::Orbit, "builtin:nope"));
        assert_eq!(r.exit_code, EXIT_INPUT);
        let r = run_command(&Command::new(Verb::Orbit, "builtin:swap2").with_point("A(3"));
        assert_eq!(r.exit_code, EXIT_INPUT);
        let r = run_command(&Command::new(Verb::Continuity, "builtin:swap2").with_point("A(3)"));
        assert_eq!(r.exit_code, EXIT_PRECONDITION);
    }
}
