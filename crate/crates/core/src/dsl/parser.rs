//! Lexer and recursive-descent parser for `.dsk` system files.
//! The accepted language is documented in `GRAMMAR.md`.

use std::collections::HashSet;
use std::sync::Arc;

use super::ast::{Atom, Entry, Expr, Rule, SystemSpec, Term};
use super::seq::{Poly, SeqDecl, SeqDef};
use crate::error::{Error, Result};
use crate::space::{SpaceSpec, TreeSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(u64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: &[&str] = &[
    "->", ">=", "<=", "==", "(", ")", "{", "}", "[", "]", ",", "|", "+", "-", "*", "%", ";", ":",
    "=", ">", "<", "^",
];

fn lex(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (ln, line) in src.lines().enumerate() {
        let line_no = ln + 1;
        let code = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = code.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let column = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[start..i].iter().collect();
                let n = text.parse().map_err(|_| Error::Syntax {
                    line: line_no,
                    column,
                    message: format!("integer `{text}` out of range"),
                })?;
                out.push(Token {
                    tok: Tok::Int(n),
                    line: line_no,
                    column,
                });
            } else if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line: line_no,
                    column,
                });
            } else {
                let rest: String = chars[i..].iter().take(2).collect();
                let sym = SYMBOLS
                    .iter()
                    .find(|s| rest.starts_with(**s))
                    .ok_or_else(|| Error::Syntax {
                        line: line_no,
                        column,
                        message: format!("unexpected character `{c}`"),
                    })?;
                i += sym.len();
                out.push(Token {
                    tok: Tok::Sym(sym),
                    line: line_no,
                    column,
                });
            }
        }
    }
    let line = src.lines().count().max(1);
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: 1,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

struct RawRule {
    rule: Rule,
    line: usize,
    column: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, sym: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(s) if *s == sym) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, sym: &str) -> Result<()> {
        if self.eat(sym) {
            Ok(())
        } else {
            self.err(format!("expected `{sym}`, found {}", describe(self.peek())))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn keyword(&mut self, kw: &str) -> Result<()> {
        if self.is_keyword(kw) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.pos += 1;
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }

    fn int(&mut self) -> Result<u64> {
        match *self.peek() {
            Tok::Int(n) => {
                self.pos += 1;
                Ok(n)
            }
            ref t => self.err(format!("expected integer, found {}", describe(t))),
        }
    }

    /// `('+'|'-') INT`, or nothing.
    fn signed_offset(&mut self) -> Result<i64> {
        if self.eat("+") {
            Ok(self.int()? as i64)
        } else if self.eat("-") {
            Ok(-(self.int()? as i64))
        } else {
            Ok(0)
        }
    }

    fn space(&mut self) -> Result<Vec<TreeSpec>> {
        self.keyword("space")?;
        self.expect("{")?;
        let mut trees = Vec::new();
        while !self.eat("}") {
            self.keyword("tree")?;
            let id = self.ident()?;
            self.keyword("height")?;
            let h = self.int()? as usize;
            trees.push(TreeSpec::new(&id, h));
        }
        Ok(trees)
    }

    fn poly_tail(&mut self, poly: &mut Poly) -> Result<()> {
        loop {
            let sign = if self.eat("+") {
                1
            } else if self.eat("-") {
                -1
            } else {
                return Ok(());
            };
            self.poly_term(poly, sign)?;
        }
    }

    fn poly_term(&mut self, poly: &mut Poly, sign: i64) -> Result<()> {
        let mut coef = 1i64;
        if let Tok::Int(c) = *self.peek() {
            self.pos += 1;
            if !self.eat("*") {
                poly.add_term(0, sign * c as i64);
                return Ok(());
            }
            coef = c as i64;
        }
        if !self.is_keyword("n") {
            return self.err("expected `n` in polynomial");
        }
        self.pos += 1;
        let degree = if self.eat("^") { self.int()? as usize } else { 1 };
        poly.add_term(degree, sign * coef);
        Ok(())
    }

    fn seq_decl(&mut self) -> Result<SeqDecl> {
        self.keyword("seq")?;
        let name = self.ident()?;
        self.expect(":")?;
        let head = self.ident()?;
        if head != name {
            return self.err(format!("expected `{name}`"));
        }
        self.expect("(")?;
        if let Tok::Int(0) = self.peek() {
            self.pos += 1;
            self.expect(")")?;
            self.expect("=")?;
            let initial = self.int()?;
            self.expect(";")?;
            for expected in [name.as_str(), "("] {
                if expected == "(" {
                    self.expect("(")?;
                } else if self.ident()? != expected {
                    return self.err(format!("expected `{name}`"));
                }
            }
            self.keyword("n")?;
            self.expect(")")?;
            self.expect("=")?;
            if self.ident()? != name {
                return self.err(format!("expected `{name}(n-1)`"));
            }
            self.expect("(")?;
            self.keyword("n")?;
            self.expect("-")?;
            if self.int()? != 1 {
                return self.err("recurrences must read `n-1`");
            }
            self.expect(")")?;
            let mut forcing = Poly::default();
            self.poly_tail(&mut forcing)?;
            Ok(SeqDecl::new(&name, SeqDef::Recurrence { initial, forcing }))
        } else {
            self.keyword("n")?;
            self.expect(")")?;
            self.expect("=")?;
            let mut poly = Poly::default();
            let sign = if self.eat("-") { -1 } else { 1 };
            self.poly_term(&mut poly, sign)?;
            self.poly_tail(&mut poly)?;
            Ok(SeqDecl::new(&name, SeqDef::Explicit(poly)))
        }
    }

    fn at_atom_start(&self) -> bool {
        matches!(self.peek(), Tok::Ident(_))
            && match self.peek_at(1) {
                Tok::Sym(s) => matches!(*s, ">=" | "<=" | ">" | "<" | "%"),
                Tok::Ident(s) => s == "in" || s == "notin",
                _ => false,
            }
    }

    fn atom(&mut self) -> Result<Atom> {
        let var = self.ident()?;
        match self.bump() {
            Tok::Sym(">=") => Ok(Atom::Ge(var, self.int()?)),
            Tok::Sym(">") => Ok(Atom::Ge(var, self.int()? + 1)),
            Tok::Sym("<=") => Ok(Atom::Le(var, self.int()?)),
            Tok::Sym("<") => match self.int()? {
                0 => self.err(format!("`{var} < 0` is unsatisfiable")),
                c => Ok(Atom::Le(var, c - 1)),
            },
            Tok::Sym("%") => {
                let modulus = self.int()?;
                self.expect("==")?;
                let residue = self.int()?;
                if modulus < 2 {
                    return self.err("moduli must be at least 2");
                }
                if residue >= modulus {
                    return self.err("residue must be smaller than the modulus");
                }
                Ok(Atom::Mod { var, modulus, residue })
            }
            Tok::Ident(kw) if kw == "in" => {
                let seq = self.ident()?;
                let binder = if self.eat("[") {
                    let b = self.ident()?;
                    self.expect("]")?;
                    Some(b)
                } else {
                    None
                };
                let offset = self.signed_offset()?;
                Ok(Atom::In {
                    var,
                    seq,
                    binder,
                    offset,
                })
            }
            Tok::Ident(kw) if kw == "notin" => {
                let seq = self.ident()?;
                let offset = self.signed_offset()?;
                Ok(Atom::NotIn { var, seq, offset })
            }
            t => self.err(format!("expected a guard operator, found {}", describe(&t))),
        }
    }

    fn pattern(&mut self, guard: &mut Vec<Atom>) -> Result<Vec<Entry>> {
        self.expect("(")?;
        let mut entries = Vec::new();
        if self.eat(")") {
            return Ok(entries);
        }
        loop {
            match self.peek().clone() {
                Tok::Int(c) => {
                    self.pos += 1;
                    entries.push(Entry::Const(c));
                }
                Tok::Ident(v) => {
                    self.pos += 1;
                    entries.push(Entry::Var(v));
                    if self.eat("|") {
                        guard.push(self.atom()?);
                        while matches!(self.peek(), Tok::Sym(",")) {
                            self.pos += 1;
                            if self.at_atom_start() {
                                guard.push(self.atom()?);
                            } else {
                                self.pos -= 1;
                                break;
                            }
                        }
                    }
                }
                t => return self.err(format!("expected pattern entry, found {}", describe(&t))),
            }
            if self.eat(")") {
                return Ok(entries);
            }
            self.expect(",")?;
        }
    }

    fn term(&mut self, sign: i64) -> Result<Term> {
        match self.peek().clone() {
            Tok::Int(c) => {
                self.pos += 1;
                if self.eat("*") {
                    self.var_or_seq(sign * c as i64)
                } else {
                    Ok(Term::Const(sign * c as i64))
                }
            }
            Tok::Ident(_) => self.var_or_seq(sign),
            t => self.err(format!("expected index expression, found {}", describe(&t))),
        }
    }

    fn var_or_seq(&mut self, coef: i64) -> Result<Term> {
        let name = self.ident()?;
        if self.eat("(") {
            let var = self.ident()?;
            let offset = self.signed_offset()?;
            self.expect(")")?;
            Ok(Term::Seq {
                coef,
                seq: name,
                var,
                offset,
            })
        } else {
            Ok(Term::Var { coef, var: name })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        let sign = if self.eat("-") { -1 } else { 1 };
        terms.push(self.term(sign)?);
        loop {
            if self.eat("+") {
                terms.push(self.term(1)?);
            } else if self.eat("-") {
                terms.push(self.term(-1)?);
            } else {
                return Ok(Expr { terms });
            }
        }
    }

    fn rule(&mut self) -> Result<RawRule> {
        let (line, column) = self.here();
        self.keyword("rule")?;
        let src = self.ident()?;
        let mut guard = Vec::new();
        let pattern = self.pattern(&mut guard)?;
        self.expect("->")?;
        let dst = self.ident()?;
        self.expect("(")?;
        let mut image = Vec::new();
        if !self.eat(")") {
            loop {
                image.push(self.expr()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        Ok(RawRule {
            rule: Rule {
                src: Arc::from(src.as_str()),
                pattern,
                guard,
                dst: Arc::from(dst.as_str()),
                image,
            },
            line,
            column,
        })
    }

    fn expect_block(&mut self) -> Result<Vec<(String, String)>> {
        self.keyword("expect")?;
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.eat("}") {
            let key = self.ident()?;
            self.expect("=")?;
            let value = match self.bump() {
                Tok::Ident(s) => s,
                Tok::Int(n) => n.to_string(),
                t => return self.err(format!("expected a value, found {}", describe(&t))),
            };
            out.push((key, value));
            self.eat(",");
        }
        Ok(out)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".to_string(),
    }
}

/// Parses and resolves a system description.
pub fn parse_system(source: &str) -> Result<SystemSpec> {
    let mut p = Parser {
        toks: lex(source)?,
        pos: 0,
    };
    let mut name = None;
    let mut ordered = false;
    let mut trees = None;
    let mut seqs = Vec::new();
    let mut rules = Vec::new();
    let mut expect = Vec::new();
    loop {
        match p.peek().clone() {
            Tok::Eof => break,
            Tok::Ident(kw) => match kw.as_str() {
                "system" => {
                    p.pos += 1;
                    name = Some(p.ident()?);
                    if p.is_keyword("ordered") {
                        p.pos += 1;
                        ordered = true;
                    }
                }
                "space" => {
                    if trees.is_some() {
                        return p.err("duplicate space block");
                    }
                    trees = Some(p.space()?);
                }
                "seq" => seqs.push(Arc::new(p.seq_decl()?)),
                "rules" => {
                    p.pos += 1;
                    p.expect("{")?;
                    while !p.eat("}") {
                        rules.push(p.rule()?);
                    }
                }
                "rule" => rules.push(p.rule()?),
                "expect" => expect.extend(p.expect_block()?),
                _ => return p.err(format!("unexpected `{kw}`")),
            },
            t => return p.err(format!("unexpected {}", describe(&t))),
        }
    }
    let space = SpaceSpec::new(trees.ok_or(Error::NoSpace)?)?;
    let mut seen = HashSet::new();
    for s in &seqs {
        if !seen.insert(s.name.clone()) {
            return Err(Error::InvalidDeclaration(format!("duplicate sequence `{}`", s.name)));
        }
        s.check_increasing(64)?;
    }
    let rules = rules
        .into_iter()
        .map(|r| resolve_rule(r, &space, &seqs))
        .collect::<Result<Vec<_>>>()?;
    Ok(SystemSpec {
        name: name.unwrap_or_else(|| "unnamed".to_string()),
        ordered,
        space,
        seqs,
        rules,
        expect,
    })
}

fn resolve_rule(raw: RawRule, space: &SpaceSpec, seqs: &[Arc<SeqDecl>]) -> Result<Rule> {
    let RawRule { mut rule, line, column } = raw;
    let at = |message: String| Error::Syntax { line, column, message };
    for (tree, len) in [(&rule.src, rule.pattern.len()), (&rule.dst, rule.image.len())] {
        let tree_spec = space.tree(tree).ok_or_else(|| Error::UnknownTree(tree.to_string()))?;
        // interned so points built from this rule share the space's names
        let height = tree_spec.height;
        if len > height {
            return Err(Error::PatternTooLong {
                tree: tree.to_string(),
                len,
                height,
            });
        }
    }
    rule.src = space.tree(&rule.src).unwrap().id.clone();
    rule.dst = space.tree(&rule.dst).unwrap().id.clone();
    let mut vars: Vec<String> = Vec::new();
    for (_, v) in rule.pattern_vars() {
        if vars.iter().any(|u| u == v) {
            return Err(at(format!("variable `{v}` occurs twice in the pattern")));
        }
        vars.push(v.to_string());
    }
    let known_seq = |name: &str| seqs.iter().any(|s| s.name == name);
    for a in &rule.guard {
        if let Some(b) = a.binder() {
            if vars.iter().any(|u| u == b) {
                return Err(at(format!("binder `{b}` shadows another variable")));
            }
            vars.push(b.to_string());
        }
    }
    let mut bound_vars: HashSet<&str> = HashSet::new();
    for a in &rule.guard {
        if !vars.iter().any(|u| u == a.var()) {
            return Err(Error::UnknownVariable(a.var().to_string()));
        }
        if let Atom::In { seq, .. } | Atom::NotIn { seq, .. } = a {
            if !known_seq(seq) {
                return Err(Error::UnknownSequence(seq.clone()));
            }
        }
        if a.binder().is_some() && !bound_vars.insert(a.var()) {
            return Err(at(format!(
                "variable `{}` has more than one sequence binder",
                a.var()
            )));
        }
    }
    for e in &rule.image {
        for t in &e.terms {
            match t {
                Term::Var { var, .. } if !vars.contains(var) => {
                    return Err(Error::UnknownVariable(var.clone()))
                }
                Term::Seq { seq, var, .. } => {
                    if !known_seq(seq) {
                        return Err(Error::UnknownSequence(seq.clone()));
                    }
                    if !vars.contains(var) {
                        return Err(Error::UnknownVariable(var.clone()));
                    }
                }
                _ => {}
            }
        }
    }
    let order: Vec<usize> = rule.guard_groups().into_iter().flatten().collect();
    rule.guard = order.into_iter().map(|i| rule.guard[i].clone()).collect();
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::ast::apply_map;
    use crate::space::Point;

    const SWAP2: &str = "
system swap2 ordered
space { tree A height 1  tree B height 1 }
rules {
  rule A() -> B()
  rule B() -> A()
  rule A(n) -> B(n)
  rule B(n) -> A(n+1)
}
expect { transitive = true }
";

    #[test]
    fn parses_swap2() {
        let s = parse_system(SWAP2).unwrap();
        assert_eq!(s.name, "swap2");
        assert!(s.ordered);
        assert_eq!(s.space.trees().len(), 2);
        assert_eq!(s.rules.len(), 4);
        assert_eq!(s.expectation("transitive"), Some("true"));
        assert_eq!(apply_map(&s, &Point::new("B", vec![3])).unwrap(), Point::new("A", vec![4]));
    }

    #[test]
    fn guards_inside_patterns() {
        let s = parse_system(
            "system g space { tree D height 3 }
             rules { rule D(k, j | j >= 4, j % 3 == 1, 0) -> D(k, j-3, 0) }",
        )
        .unwrap();
        let r = &s.rules[0];
        assert_eq!(r.pattern.len(), 3);
        assert_eq!(r.guard.len(), 2);
        assert_eq!(r.pattern[2], Entry::Const(0));
        assert_eq!(r.to_string(), "rule D(k, j | j >= 4, j % 3 == 1, 0) -> D(k, j-3, 0)");
    }

    #[test]
    fn affine_image() {
        let s = parse_system("system s space { tree D height 3 } rules { rule D(k,0,i) -> D(0,0,i+2) }").unwrap();
        assert_eq!(s.rules.len(), 1);
        assert_eq!(s.rules[0].image[2].to_string(), "i+2");
        assert_eq!(s.rules[0].image[2].affine_coef("i"), Some(1));
    }

    #[test]
    fn missing_space() {
        assert_eq!(
            parse_system("rule A(n | n % 2 == 0) -> A(n)").unwrap_err(),
            Error::NoSpace
        );
        assert_eq!(Error::NoSpace.to_string(), "no space declared");
    }

    #[test]
    fn syntax_errors_carry_position() {
        match parse_system("system s\nspace { tree A height 1 }\nrules { rule A(n) => A(n) }") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 19)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn resolution_errors() {
        let space = "space { tree A height 1 } ";
        assert_eq!(
            parse_system(&format!("{space} rule B(n) -> A(n)")).unwrap_err(),
            Error::UnknownTree("B".into())
        );
        assert_eq!(
            parse_system(&format!("{space} rule A(n) -> A(m)")).unwrap_err(),
            Error::UnknownVariable("m".into())
        );
        assert_eq!(
            parse_system(&format!("{space} rule A(n | n in q[k]) -> A(k)")).unwrap_err(),
            Error::UnknownSequence("q".into())
        );
        assert!(matches!(
            parse_system(&format!("{space} rule A(n, m) -> A(n)")).unwrap_err(),
            Error::PatternTooLong { len: 2, height: 1, .. }
        ));
        assert!(parse_system(&format!("{space} rule A(n | n % 1 == 0) -> A(n)")).is_err());
    }

    #[test]
    fn sequence_declarations() {
        let s = parse_system(
            "system c space { tree D height 1 }
             seq a : a(0)=0 ; a(n)=a(n-1)+n+1
             seq b : b(n)=2*n^2+1
             rules { rule D(k | k in a[n], n >= 1) -> D(a(n+1)-1) rule D(k | k notin a) -> D(k-1) }",
        )
        .unwrap();
        assert_eq!(s.seqs.len(), 2);
        assert_eq!(s.seqs[1].value(3), Some(19));
        assert_eq!(s.rules[0].image[0].to_string(), "a(n+1)-1");
        // D(5) = D(a(2)) -> D(a(3)-1) = D(8)
        assert_eq!(apply_map(&s, &Point::new("D", vec![5])).unwrap(), Point::new("D", vec![8]));
        assert_eq!(apply_map(&s, &Point::new("D", vec![7])).unwrap(), Point::new("D", vec![6]));
    }
}
