use std::fmt;
use std::sync::Arc;

use super::seq::SeqDecl;
use crate::error::{Error, Result};
use crate::space::{Point, SpaceSpec};

/// A single-variable guard atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    /// `v >= c`
    Ge(String, u64),
    /// `v <= c`
    Le(String, u64),
    /// `v % m == r`
    Mod { var: String, modulus: u64, residue: u64 },
    /// `v in s[n] + offset`: `v = s(n) + offset`, binding `n` when given.
    In {
        var: String,
        seq: String,
        binder: Option<String>,
        offset: i64,
    },
    /// `v notin s + offset`: `v - offset` is not a term of `s`.
    NotIn { var: String, seq: String, offset: i64 },
}

impl Atom {
    pub fn var(&self) -> &str {
        match self {
            Atom::Ge(v, _) | Atom::Le(v, _) => v,
            Atom::Mod { var, .. } | Atom::In { var, .. } | Atom::NotIn { var, .. } => var,
        }
    }

    pub fn binder(&self) -> Option<&str> {
        match self {
            Atom::In { binder, .. } => binder.as_deref(),
            _ => None,
        }
    }

    pub fn uses_sequence(&self) -> bool {
        matches!(self, Atom::In { .. } | Atom::NotIn { .. })
    }

    pub(crate) fn rename(&self, from: &str, to: &str) -> Atom {
        let r = |v: &String| if v == from { to.to_string() } else { v.clone() };
        match self {
            Atom::Ge(v, c) => Atom::Ge(r(v), *c),
            Atom::Le(v, c) => Atom::Le(r(v), *c),
            Atom::Mod { var, modulus, residue } => Atom::Mod {
                var: r(var),
                modulus: *modulus,
                residue: *residue,
            },
            Atom::In { var, seq, binder, offset } => Atom::In {
                var: r(var),
                seq: seq.clone(),
                binder: binder.as_ref().map(r),
                offset: *offset,
            },
            Atom::NotIn { var, seq, offset } => Atom::NotIn {
                var: r(var),
                seq: seq.clone(),
                offset: *offset,
            },
        }
    }
}

fn fmt_offset(f: &mut fmt::Formatter<'_>, offset: i64) -> fmt::Result {
    match offset {
        0 => Ok(()),
        o if o > 0 => write!(f, "+{o}"),
        o => write!(f, "-{}", o.unsigned_abs()),
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Ge(v, c) => write!(f, "{v} >= {c}"),
            Atom::Le(v, c) => write!(f, "{v} <= {c}"),
            Atom::Mod { var, modulus, residue } => write!(f, "{var} % {modulus} == {residue}"),
            Atom::In { var, seq, binder, offset } => {
                write!(f, "{var} in {seq}")?;
                if let Some(b) = binder {
                    write!(f, "[{b}]")?;
                }
                fmt_offset(f, *offset)
            }
            Atom::NotIn { var, seq, offset } => {
                write!(f, "{var} notin {seq}")?;
                fmt_offset(f, *offset)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Entry {
    Const(u64),
    Var(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Const(i64),
    Var { coef: i64, var: String },
    /// `coef * s(var + offset)`
    Seq {
        coef: i64,
        seq: String,
        var: String,
        offset: i64,
    },
}

/// An index expression: a signed sum of terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Expr {
    pub terms: Vec<Term>,
}

impl Expr {
    pub fn constant(c: i64) -> Self {
        Expr {
            terms: vec![Term::Const(c)],
        }
    }

    pub fn var(v: &str) -> Self {
        Expr {
            terms: vec![Term::Var {
                coef: 1,
                var: v.to_string(),
            }],
        }
    }

    /// Variables the expression reads, including sequence arguments.
    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.terms.iter().filter_map(|t| match t {
            Term::Const(_) => None,
            Term::Var { var, .. } | Term::Seq { var, .. } => Some(var.as_str()),
        })
    }

    pub fn uses_sequence(&self) -> bool {
        self.terms.iter().any(|t| matches!(t, Term::Seq { .. }))
    }

    pub fn constant_value(&self) -> Option<i64> {
        let mut acc = 0i64;
        for t in &self.terms {
            match t {
                Term::Const(c) => acc += c,
                _ => return None,
            }
        }
        Some(acc)
    }

    /// Coefficient of `var` when the expression is affine in it (no
    /// sequence term reads `var`).
    pub fn affine_coef(&self, var: &str) -> Option<i64> {
        let mut c = 0;
        for t in &self.terms {
            match t {
                Term::Var { coef, var: v } if v == var => c += coef,
                Term::Seq { var: v, .. } if v == var => return None,
                _ => {}
            }
        }
        Some(c)
    }

    pub fn eval(&self, env: &Env, seqs: &[Arc<SeqDecl>]) -> Option<i64> {
        let mut acc: i64 = 0;
        for t in &self.terms {
            acc = acc.checked_add(match t {
                Term::Const(c) => *c,
                Term::Var { coef, var } => coef.checked_mul(env.get(var)? as i64)?,
                Term::Seq { coef, seq, var, offset } => {
                    let arg = (env.get(var)? as i64).checked_add(*offset)?;
                    if arg < 0 {
                        return None;
                    }
                    let s = seqs.iter().find(|s| s.name == *seq)?;
                    coef.checked_mul(s.value(arg as u64)? as i64)?
                }
            })?;
        }
        Some(acc)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let (neg, body) = match t {
                Term::Const(c) => (*c < 0, c.unsigned_abs().to_string()),
                Term::Var { coef, var } => {
                    let a = coef.unsigned_abs();
                    let body = if a == 1 { var.clone() } else { format!("{a}*{var}") };
                    (*coef < 0, body)
                }
                Term::Seq { coef, seq, var, offset } => {
                    let arg = match offset {
                        0 => var.clone(),
                        o if *o > 0 => format!("{var}+{o}"),
                        o => format!("{var}-{}", o.unsigned_abs()),
                    };
                    let a = coef.unsigned_abs();
                    let body = if a == 1 {
                        format!("{seq}({arg})")
                    } else {
                        format!("{a}*{seq}({arg})")
                    };
                    (*coef < 0, body)
                }
            };
            match (i, neg) {
                (0, true) => write!(f, "-{body}")?,
                (0, false) => f.write_str(&body)?,
                (_, true) => write!(f, "-{body}")?,
                (_, false) => write!(f, "+{body}")?,
            }
        }
        Ok(())
    }
}

/// Variable bindings produced by matching; tiny, so a vector.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Env(Vec<(String, u64)>);

impl Env {
    pub fn get(&self, v: &str) -> Option<u64> {
        self.0.iter().find(|(n, _)| n == v).map(|&(_, x)| x)
    }

    pub fn set(&mut self, v: &str, x: u64) {
        match self.0.iter_mut().find(|(n, _)| n == v) {
            Some(slot) => slot.1 = x,
            None => self.0.push((v.to_string(), x)),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.0.iter().map(|(n, x)| (n.as_str(), *x))
    }
}

/// Checks an atom against an environment in which its variable is bound;
/// `In` atoms with a binder also bind it.
pub fn eval_atom(atom: &Atom, env: &mut Env, seqs: &[Arc<SeqDecl>]) -> Option<bool> {
    let find = |name: &str| seqs.iter().find(|s| s.name == name);
    Some(match atom {
        Atom::Ge(v, c) => env.get(v)? >= *c,
        Atom::Le(v, c) => env.get(v)? <= *c,
        Atom::Mod { var, modulus, residue } => env.get(var)? % modulus == *residue,
        Atom::In { var, seq, binder, offset } => {
            let x = env.get(var)? as i64 - offset;
            let idx = if x < 0 { None } else { find(seq)?.index_of(x as u64) };
            match (idx, binder) {
                (Some(n), Some(b)) => {
                    if let Some(prev) = env.get(b) {
                        prev == n
                    } else {
                        env.set(b, n);
                        true
                    }
                }
                (Some(_), None) => true,
                (None, _) => false,
            }
        }
        Atom::NotIn { var, seq, offset } => {
            let x = env.get(var)? as i64 - offset;
            x < 0 || find(seq)?.index_of(x as u64).is_none()
        }
    })
}

/// Evaluates a conjunction: binding atoms first, then the rest.
pub fn eval_guard(guard: &[Atom], env: &mut Env, seqs: &[Arc<SeqDecl>]) -> Option<bool> {
    for a in guard.iter().filter(|a| a.binder().is_some()) {
        if !eval_atom(a, env, seqs)? {
            return Some(false);
        }
    }
    for a in guard.iter().filter(|a| a.binder().is_none()) {
        if !eval_atom(a, env, seqs)? {
            return Some(false);
        }
    }
    Some(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub src: Arc<str>,
    pub pattern: Vec<Entry>,
    pub guard: Vec<Atom>,
    pub dst: Arc<str>,
    pub image: Vec<Expr>,
}

impl Rule {
    pub fn pattern_vars(&self) -> impl Iterator<Item = (usize, &str)> {
        self.pattern.iter().enumerate().filter_map(|(i, e)| match e {
            Entry::Var(v) => Some((i, v.as_str())),
            Entry::Const(_) => None,
        })
    }

    pub fn binders(&self) -> impl Iterator<Item = &str> {
        self.guard.iter().filter_map(|a| a.binder())
    }

    pub fn atoms_on<'a>(&'a self, var: &'a str) -> impl Iterator<Item = &'a Atom> + 'a {
        self.guard.iter().filter(move |a| a.var() == var)
    }

    /// Guard atoms grouped by the pattern position they are written after:
    /// an atom goes with the entry of its variable, or with the entry whose
    /// atom binds it.
    pub fn guard_groups(&self) -> Vec<Vec<usize>> {
        let mut printed = vec![false; self.guard.len()];
        let mut groups = vec![Vec::new(); self.pattern.len()];
        for (i, e) in self.pattern.iter().enumerate() {
            let Entry::Var(v) = e else { continue };
            let mut scope: Vec<&str> = vec![v];
            let mut grew = true;
            while grew {
                grew = false;
                for (k, a) in self.guard.iter().enumerate() {
                    if !printed[k] && scope.contains(&a.var()) {
                        printed[k] = true;
                        groups[i].push(k);
                        if let Some(b) = a.binder() {
                            scope.push(b);
                        }
                        grew = true;
                    }
                }
            }
        }
        groups
    }

    pub fn uses_sequence(&self) -> bool {
        self.guard.iter().any(Atom::uses_sequence) || self.image.iter().any(Expr::uses_sequence)
    }

    /// Matches `p` and returns the variable bindings.
    pub fn bind(&self, p: &Point, seqs: &[Arc<SeqDecl>]) -> Option<Env> {
        if p.tree() != &*self.src || p.depth() != self.pattern.len() {
            return None;
        }
        let mut env = Env::default();
        for (e, &x) in self.pattern.iter().zip(p.path()) {
            match e {
                Entry::Const(c) if *c != x => return None,
                Entry::Const(_) => {}
                Entry::Var(v) => env.set(v, x),
            }
        }
        if eval_guard(&self.guard, &mut env, seqs)? {
            Some(env)
        } else {
            None
        }
    }

    pub fn matches(&self, p: &Point, seqs: &[Arc<SeqDecl>]) -> bool {
        self.bind(p, seqs).is_some()
    }

    pub fn eval_image(&self, env: &Env, seqs: &[Arc<SeqDecl>]) -> Option<Point> {
        let path = self
            .image
            .iter()
            .map(|e| e.eval(env, seqs).and_then(|v| u64::try_from(v).ok()))
            .collect::<Option<Vec<_>>>()?;
        Some(Point::with_tree(self.dst.clone(), path))
    }

    /// Identity on its cell: same tree, each image entry repeats the
    /// pattern entry at the same position.
    pub fn is_syntactic_identity(&self) -> bool {
        self.src == self.dst
            && self.pattern.len() == self.image.len()
            && self.pattern.iter().zip(&self.image).all(|(p, e)| match p {
                Entry::Const(c) => e.constant_value() == Some(*c as i64),
                Entry::Var(v) => *e == Expr::var(v),
            })
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "rule {}(", self.src)?;
        let groups = self.guard_groups();
        for (i, e) in self.pattern.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            match e {
                Entry::Const(c) => write!(f, "{c}")?,
                Entry::Var(v) => {
                    f.write_str(v)?;
                    if !groups[i].is_empty() {
                        f.write_str(" | ")?;
                        for (k, &a) in groups[i].iter().enumerate() {
                            if k > 0 {
                                f.write_str(", ")?;
                            }
                            write!(f, "{}", self.guard[a])?;
                        }
                    }
                }
            }
        }
        write!(f, ") -> {}(", self.dst)?;
        for (i, e) in self.image.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{e}")?;
        }
        f.write_str(")")
    }
}

/// A finitely presented self-map of a phase space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemSpec {
    pub name: String,
    pub ordered: bool,
    pub space: SpaceSpec,
    pub seqs: Vec<Arc<SeqDecl>>,
    pub rules: Vec<Rule>,
    /// `expect { key = value }` pairs, in declaration order.
    pub expect: Vec<(String, String)>,
}

impl SystemSpec {
    pub fn uses_sequences(&self) -> bool {
        self.rules.iter().any(Rule::uses_sequence)
    }

    pub fn rule_index(&self, p: &Point) -> Option<usize> {
        self.rules.iter().position(|r| r.matches(p, &self.seqs))
    }

    pub fn expectation(&self, key: &str) -> Option<&str> {
        self.expect.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Largest constant mentioned in patterns or guards.
    pub fn max_constant(&self) -> u64 {
        let mut m = 0;
        for r in &self.rules {
            for e in &r.pattern {
                if let Entry::Const(c) = e {
                    m = m.max(*c);
                }
            }
            for a in &r.guard {
                match a {
                    Atom::Ge(_, c) | Atom::Le(_, c) => m = m.max(*c),
                    Atom::Mod { modulus, .. } => m = m.max(*modulus),
                    _ => {}
                }
            }
        }
        m
    }
}

/// One application of the map: the first matching rule is applied.
pub fn apply_map(s: &SystemSpec, p: &Point) -> Result<Point> {
    for r in &s.rules {
        if let Some(env) = r.bind(p, &s.seqs) {
            return r
                .eval_image(&env, &s.seqs)
                .ok_or_else(|| Error::CoverageGap(p.clone()));
        }
    }
    Err(Error::CoverageGap(p.clone()))
}

/// Like [`apply_map`], also returning the index of the rule used.
pub fn apply_map_traced(s: &SystemSpec, p: &Point) -> Result<(usize, Point)> {
    for (i, r) in s.rules.iter().enumerate() {
        if let Some(env) = r.bind(p, &s.seqs) {
            let q = r
                .eval_image(&env, &s.seqs)
                .ok_or_else(|| Error::CoverageGap(p.clone()))?;
            return Ok((i, q));
        }
    }
    Err(Error::CoverageGap(p.clone()))
}

/// `f^n(p)`.
pub fn apply_n(s: &SystemSpec, p: &Point, n: u64) -> Result<Point> {
    let mut x = p.clone();
    for _ in 0..n {
        x = apply_map(s, &x)?;
    }
    Ok(x)
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "system {}", self.name)?;
        if self.ordered {
            f.write_str(" ordered")?;
        }
        f.write_str("\nspace {")?;
        for t in self.space.trees() {
            write!(f, " tree {} height {}", t.id, t.height)?;
        }
        f.write_str(" }\n")?;
        for s in &self.seqs {
            writeln!(f, "{s}")?;
        }
        f.write_str("rules {\n")?;
        for r in &self.rules {
            writeln!(f, "  {r}")?;
        }
        f.write_str("}\n")?;
        if !self.expect.is_empty() {
            f.write_str("expect {")?;
            for (k, v) in &self.expect {
                write!(f, " {k} = {v}")?;
            }
            f.write_str(" }\n")?;
        }
        Ok(())
    }
}
