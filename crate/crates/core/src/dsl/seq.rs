use std::fmt;
use std::sync::RwLock;

use crate::error::{Error, Result};

/// Integer polynomial in `n`, lowest degree first.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    pub coeffs: Vec<i64>,
}

impl Poly {
    pub fn eval(&self, n: u64) -> i128 {
        let n = n as i128;
        self.coeffs
            .iter()
            .rev()
            .fold(0i128, |acc, &c| acc * n + c as i128)
    }

    pub fn add_term(&mut self, degree: usize, coef: i64) {
        if self.coeffs.len() <= degree {
            self.coeffs.resize(degree + 1, 0);
        }
        self.coeffs[degree] += coef;
    }

    fn trimmed(&self) -> &[i64] {
        let n = self.coeffs.iter().rposition(|&c| c != 0).map_or(0, |i| i + 1);
        &self.coeffs[..n]
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms = self.trimmed();
        if terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (deg, &c) in terms.iter().enumerate().rev() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    f.write_str("-")?;
                }
            } else {
                write!(f, "{sign}")?;
            }
            first = false;
            let a = c.unsigned_abs();
            match deg {
                0 => write!(f, "{a}")?,
                1 if a == 1 => f.write_str("n")?,
                1 => write!(f, "{a}*n")?,
                _ if a == 1 => write!(f, "n^{deg}")?,
                _ => write!(f, "{a}*n^{deg}")?,
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SeqDef {
    /// `s(0) = initial ; s(n) = s(n-1) + forcing(n)`
    Recurrence { initial: u64, forcing: Poly },
    /// `s(n) = poly(n)`
    Explicit(Poly),
}

/// A declared strictly increasing sequence of naturals. Values are memoized
/// in a prefix cache; the cache is the only mutable state and only ever
/// grows, so concurrent readers see consistent values.
#[derive(Debug)]
pub struct SeqDecl {
    pub name: String,
    pub def: SeqDef,
    cache: RwLock<Vec<u64>>,
}

/// Largest index a sequence is extended to.
const MAX_INDEX: u64 = 1 << 22;

impl SeqDecl {
    pub fn new(name: &str, def: SeqDef) -> Self {
        Self {
            name: name.to_string(),
            def,
            cache: RwLock::new(Vec::new()),
        }
    }

    fn extend_to(&self, n: u64) -> Option<()> {
        if n >= MAX_INDEX {
            return None;
        }
        if (self.cache.read().unwrap().len() as u64) > n {
            return Some(());
        }
        let mut cache = self.cache.write().unwrap();
        while cache.len() as u64 <= n {
            let i = cache.len() as u64;
            let v: i128 = match &self.def {
                SeqDef::Recurrence { initial, forcing } => {
                    if i == 0 {
                        *initial as i128
                    } else {
                        cache[i as usize - 1] as i128 + forcing.eval(i)
                    }
                }
                SeqDef::Explicit(p) => p.eval(i),
            };
            if v < 0 || v > u64::MAX as i128 / 2 {
                return None;
            }
            cache.push(v as u64);
        }
        Some(())
    }

    /// `s(n)`, or `None` when the value leaves the supported range.
    pub fn value(&self, n: u64) -> Option<u64> {
        self.extend_to(n)?;
        Some(self.cache.read().unwrap()[n as usize])
    }

    /// The index `n` with `s(n) = v`, if `v` is a member.
    pub fn index_of(&self, v: u64) -> Option<u64> {
        let mut n = (self.cache.read().unwrap().len() as u64).max(16);
        loop {
            let last = self.value(n - 1)?;
            if last >= v {
                break;
            }
            n = n.checked_mul(2)?;
        }
        let cache = self.cache.read().unwrap();
        cache[..n as usize].binary_search(&v).ok().map(|i| i as u64)
    }

    /// Strict monotonicity: checked on a prefix, and for recurrences by
    /// positivity of the forcing term.
    pub fn check_increasing(&self, prefix: u64) -> Result<()> {
        if let SeqDef::Recurrence { forcing, .. } = &self.def {
            let c = forcing.trimmed();
            if c.last().is_none_or(|&lead| lead <= 0) {
                return Err(Error::InvalidDeclaration(format!(
                    "sequence `{}`: forcing term must be eventually positive",
                    self.name
                )));
            }
        }
        let mut prev = None;
        for n in 0..prefix {
            let v = self.value(n).ok_or_else(|| {
                Error::InvalidDeclaration(format!("sequence `{}` leaves the natural numbers", self.name))
            })?;
            if prev.is_some_and(|p| p >= v) {
                return Err(Error::InvalidDeclaration(format!(
                    "sequence `{}` is not strictly increasing at n={n}",
                    self.name
                )));
            }
            prev = Some(v);
        }
        Ok(())
    }
}

impl PartialEq for SeqDecl {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.def == other.def
    }
}

impl Eq for SeqDecl {}

impl fmt::Display for SeqDecl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = &self.name;
        match &self.def {
            SeqDef::Recurrence { initial, forcing } => {
                let body = forcing.to_string();
                let sep = if body.starts_with('-') { "" } else { "+" };
                write!(f, "seq {s} : {s}(0)={initial} ; {s}(n)={s}(n-1){sep}{body}")
            }
            SeqDef::Explicit(p) => write!(f, "seq {s} : {s}(n)={p}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangular() -> SeqDecl {
        // a(0)=0, a(n)=a(n-1)+n+1
        SeqDecl::new(
            "a",
            SeqDef::Recurrence {
                initial: 0,
                forcing: Poly { coeffs: vec![1, 1] },
            },
        )
    }

    #[test]
    fn recurrence_values() {
        let a = triangular();
        let first: Vec<u64> = (0..6).map(|n| a.value(n).unwrap()).collect();
        assert_eq!(first, vec![0, 2, 5, 9, 14, 20]);
        // closed form n(n+3)/2
        for n in 0..200 {
            assert_eq!(a.value(n).unwrap(), n * (n + 3) / 2);
        }
        a.check_increasing(100).unwrap();
    }

    #[test]
    fn membership() {
        let a = triangular();
        assert_eq!(a.index_of(0), Some(0));
        assert_eq!(a.index_of(14), Some(4));
        assert_eq!(a.index_of(15), None);
        assert_eq!(a.index_of(65), Some(10));
        assert_eq!(a.index_of(100_000 * 100_003 / 2), Some(100_000));
    }

    #[test]
    fn rejects_non_increasing() {
        let flat = SeqDecl::new(
            "b",
            SeqDef::Recurrence {
                initial: 3,
                forcing: Poly::default(),
            },
        );
        assert!(flat.check_increasing(10).is_err());
        let explicit = SeqDecl::new("c", SeqDef::Explicit(Poly { coeffs: vec![5, -1] }));
        assert!(explicit.check_increasing(10).is_err());
    }

    #[test]
    fn rendering() {
        assert_eq!(triangular().to_string(), "seq a : a(0)=0 ; a(n)=a(n-1)+n+1");
        let p = Poly { coeffs: vec![-2, 0, 3] };
        assert_eq!(p.to_string(), "3*n^2-2");
    }
}
