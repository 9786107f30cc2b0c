//! Monomials in non-commuting variables `X1..Xn`, and the shared term printer.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

/// An ordered product of variables. The empty product is the constant monomial.
///
/// Monomials are ordered by degree first and then lexicographically by
/// variable index, with `X1` before `X2` and so on. This is the scan order of
/// both Magnus orderings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial(SmallVec<[u16; 8]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn var(index: usize) -> Self {
        Monomial(smallvec::smallvec![index as u16])
    }

    pub fn from_vars(vars: &[usize]) -> Self {
        Monomial(vars.iter().map(|&v| v as u16).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&v| v as usize)
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_var(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0) as usize
    }

    /// `self * X_var^power`.
    pub fn with_power(&self, var: usize, power: usize) -> Self {
        let mut v = self.0.clone();
        v.extend(std::iter::repeat_n(var as u16, power));
        Monomial(v)
    }

    pub fn concat(&self, other: &Monomial) -> Self {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Monomial(v)
    }

    /// True when no variable occurs twice.
    pub fn is_square_free(&self) -> bool {
        let mut seen: u64 = 0;
        for &v in &self.0 {
            if v < 64 {
                let bit = 1u64 << v;
                if seen & bit != 0 {
                    return false;
                }
                seen |= bit;
            } else if self.0.iter().filter(|&&w| w == v).count() > 1 {
                return false;
            }
        }
        true
    }

    /// The product of two monomials, or `None` if it repeats a variable.
    pub fn square_free_product(&self, other: &Monomial) -> Option<Self> {
        let p = self.concat(other);
        p.is_square_free().then_some(p)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.len().cmp(&other.0.len()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        let mut first = true;
        let mut i = 0;
        while i < self.0.len() {
            let v = self.0[i];
            let mut j = i;
            while j < self.0.len() && self.0[j] == v {
                j += 1;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "X{v}")?;
            if j - i > 1 {
                write!(f, "^{}", j - i)?;
            }
            i = j;
        }
        Ok(())
    }
}

/// Prints terms in the order given, e.g. `1 + X1*X2 - X2*X1` or `1 + 2 X1`.
pub(crate) fn format_terms<'a, I>(terms: I) -> String
where
    I: IntoIterator<Item = (&'a Monomial, &'a BigInt)>,
{
    let mut out = String::new();
    for (m, c) in terms {
        if c.is_zero() {
            continue;
        }
        let magnitude = c.abs();
        if out.is_empty() {
            if c.is_negative() {
                out.push('-');
            }
        } else if c.is_negative() {
            out.push_str(" - ");
        } else {
            out.push_str(" + ");
        }
        if m.is_one() {
            out.push_str(&magnitude.to_string());
        } else if magnitude.is_one() {
            out.push_str(&m.to_string());
        } else {
            out.push_str(&format!("{magnitude} {m}"));
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}
