//! Ordinals below ω^ω in Cantor normal form.
//!
//! Only what the point codec needs: construction from a coefficient
//! vector, ordinal addition, comparison and the `w^2*3+w*1+4` rendering.

use std::cmp::Ordering;
use std::fmt;

/// An ordinal `ω^e1·c1 + … + ω^ek·ck` with `e1 > … > ek` and every `ci > 0`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Ordinal {
    terms: Vec<(u32, u64)>,
}

impl Ordinal {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `ω^exp`.
    pub fn omega_pow(exp: u32) -> Self {
        Self {
            terms: vec![(exp, 1)],
        }
    }

    pub fn finite(n: u64) -> Self {
        Self::from_terms([(0, n)])
    }

    /// Builds an ordinal from `(exponent, coefficient)` pairs listed in
    /// strictly decreasing exponent order. Zero coefficients are dropped.
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u64)>) -> Self {
        let terms: Vec<_> = terms.into_iter().filter(|&(_, c)| c > 0).collect();
        debug_assert!(terms.windows(2).all(|w| w[0].0 > w[1].0));
        Self { terms }
    }

    pub fn terms(&self) -> &[(u32, u64)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Exponent of the last (smallest) term; `None` for zero.
    pub fn trailing_exponent(&self) -> Option<u32> {
        self.terms.last().map(|&(e, _)| e)
    }

    /// Ordinal sum `self + rhs` (not commutative).
    pub fn add(&self, rhs: &Ordinal) -> Ordinal {
        let Some(&(lead, lead_coef)) = rhs.terms.first() else {
            return self.clone();
        };
        let mut terms: Vec<(u32, u64)> = self
            .terms
            .iter()
            .copied()
            .take_while(|&(e, _)| e >= lead)
            .collect();
        match terms.last_mut() {
            Some(last) if last.0 == lead => {
                last.1 += lead_coef;
                terms.extend_from_slice(&rhs.terms[1..]);
            }
            _ => terms.extend_from_slice(&rhs.terms),
        }
        Ordinal { terms }
    }
}

impl Ord for Ordinal {
    fn cmp(&self, other: &Self) -> Ordering {
        for (a, b) in self.terms.iter().zip(&other.terms) {
            let ord = a.0.cmp(&b.0).then(a.1.cmp(&b.1));
            if ord != Ordering::Equal {
                return ord;
            }
        }
        self.terms.len().cmp(&other.terms.len())
    }
}

impl PartialOrd for Ordinal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Ordinal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, &(e, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str("+")?;
            }
            match e {
                0 => write!(f, "{c}")?,
                1 => write!(f, "w*{c}")?,
                _ => write!(f, "w^{e}*{c}")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn addition_absorbs_smaller_terms() {
        // 3 + ω = ω
        assert_eq!(Ordinal::finite(3).add(&Ordinal::omega_pow(1)), Ordinal::omega_pow(1));
        // ω + ω = ω·2
        let w = Ordinal::omega_pow(1);
        assert_eq!(w.add(&w), Ordinal::from_terms([(1, 2)]));
        // (ω² + 5) + (ω·2 + 1) = ω² + ω·2 + 1
        let a = Ordinal::from_terms([(2, 1), (0, 5)]);
        let b = Ordinal::from_terms([(1, 2), (0, 1)]);
        assert_eq!(a.add(&b), Ordinal::from_terms([(2, 1), (1, 2), (0, 1)]));
    }

    #[test]
    fn ordering_and_rendering() {
        let a = Ordinal::from_terms([(2, 3), (1, 1), (0, 4)]);
        assert_eq!(a.to_string(), "w^2*3+w*1+4");
        assert!(Ordinal::from_terms([(1, 5)]) < Ordinal::omega_pow(2));
        assert!(Ordinal::from_terms([(1, 1)]) < Ordinal::from_terms([(1, 1), (0, 1)]));
        assert_eq!(Ordinal::zero().to_string(), "0");
    }
}
