//! The reduced Magnus expansion.
//!
//! Expansions live in the quotient of the non-commutative polynomial ring by
//! the ideal of monomials that repeat a variable. That ring is finite
//! dimensional, so expansions are exact and the word problem and ordering of
//! the reduced free group are decided without truncation.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::magnus::Decision;
use crate::monomial::{format_terms, Monomial};
use crate::word::Word;

/// Reduced expansions above this rank are refused; the monomial count grows
/// like the number of arrangements of subsets of the variables.
pub const DEFAULT_MAX_REDUCED_RANK: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SquareFreePoly {
    rank: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl SquareFreePoly {
    pub fn one(rank: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::one(), BigInt::one());
        SquareFreePoly { rank, terms }
    }

    /// Monomials that repeat a variable are dropped, as are zero coefficients.
    pub fn from_terms<I>(rank: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, BigInt)>,
    {
        let mut map: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (m, c) in terms {
            if let Some(v) = m.vars().find(|&v| v == 0 || v > rank) {
                return Err(Error::GeneratorOutOfRange { index: v, rank });
            }
            if m.is_square_free() {
                *map.entry(m).or_insert_with(BigInt::zero) += c;
            }
        }
        map.retain(|_, c| !c.is_zero());
        Ok(SquareFreePoly { rank, terms: map })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> BigInt {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.coefficient(&Monomial::one()).is_one()
    }

    fn check_rank(&self, other: &SquareFreePoly) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    /// `self * (1 + X_var)^e`, which is `self * (1 + e X_var)` in the quotient.
    fn mul_generator_power(&self, var: usize, e: i64) -> SquareFreePoly {
        let e = BigInt::from(e);
        let mut out = self.terms.clone();
        for (m, c) in &self.terms {
            if m.vars().any(|v| v == var) {
                continue;
            }
            *out.entry(m.with_power(var, 1)).or_insert_with(BigInt::zero) += c * &e;
        }
        out.retain(|_, c| !c.is_zero());
        SquareFreePoly { rank: self.rank, terms: out }
    }
}

pub fn sf_add(a: &SquareFreePoly, b: &SquareFreePoly) -> Result<SquareFreePoly> {
    a.check_rank(b)?;
    let mut terms = a.terms.clone();
    for (m, c) in &b.terms {
        *terms.entry(m.clone()).or_insert_with(BigInt::zero) += c;
    }
    terms.retain(|_, c| !c.is_zero());
    Ok(SquareFreePoly { rank: a.rank, terms })
}

pub fn sf_mul(a: &SquareFreePoly, b: &SquareFreePoly) -> Result<SquareFreePoly> {
    a.check_rank(b)?;
    let mut terms: BTreeMap<Monomial, BigInt> = BTreeMap::new();
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            if let Some(m) = ma.square_free_product(mb) {
                *terms.entry(m).or_insert_with(BigInt::zero) += ca * cb;
            }
        }
    }
    terms.retain(|_, c| !c.is_zero());
    Ok(SquareFreePoly { rank: a.rank, terms })
}

impl fmt::Display for SquareFreePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_terms(self.terms.iter()))
    }
}

/// Comparator for reduced free groups, with the rank guard.
#[derive(Debug, Clone, Copy)]
pub struct ReducedOrder {
    max_rank: usize,
}

impl Default for ReducedOrder {
    fn default() -> Self {
        ReducedOrder { max_rank: DEFAULT_MAX_REDUCED_RANK }
    }
}

impl ReducedOrder {
    pub fn new(max_rank: usize) -> Self {
        ReducedOrder { max_rank }
    }

    pub fn expand(&self, w: &Word) -> Result<SquareFreePoly> {
        if w.rank() > self.max_rank {
            return Err(Error::ReducedRankTooLarge { rank: w.rank(), limit: self.max_rank });
        }
        let mut p = SquareFreePoly::one(w.rank());
        for &(g, e) in w.syllables() {
            p = p.mul_generator_power(g, e);
        }
        Ok(p)
    }

    pub fn equal(&self, u: &Word, v: &Word) -> Result<bool> {
        if u.rank() != v.rank() {
            return Err(Error::RankMismatch { left: u.rank(), right: v.rank() });
        }
        Ok(u == v || self.expand(u)? == self.expand(v)?)
    }

    pub fn decide(&self, u: &Word, v: &Word) -> Result<Decision> {
        if u.rank() != v.rank() {
            return Err(Error::RankMismatch { left: u.rank(), right: v.rank() });
        }
        if u == v {
            return Ok(Decision::equal());
        }
        Ok(first_difference(&self.expand(u)?, &self.expand(v)?)
            .map(|(m, ordering)| Decision { ordering, monomial: Some(m) })
            .unwrap_or_else(Decision::equal))
    }

    pub fn compare(&self, u: &Word, v: &Word) -> Result<Ordering> {
        self.decide(u, v).map(|d| d.ordering)
    }
}

fn first_difference(a: &SquareFreePoly, b: &SquareFreePoly) -> Option<(Monomial, Ordering)> {
    let zero = BigInt::zero();
    let mut keys: Vec<&Monomial> = a.terms.keys().chain(b.terms.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().find_map(|m| {
        let ca = a.terms.get(m).unwrap_or(&zero);
        let cb = b.terms.get(m).unwrap_or(&zero);
        match ca.cmp(cb) {
            Ordering::Equal => None,
            o => Some((m.clone(), o)),
        }
    })
}

pub fn reduced_expand(w: &Word) -> Result<SquareFreePoly> {
    ReducedOrder::default().expand(w)
}

pub fn reduced_equal(u: &Word, v: &Word) -> Result<bool> {
    ReducedOrder::default().equal(u, v)
}

pub fn reduced_compare(u: &Word, v: &Word) -> Result<Ordering> {
    ReducedOrder::default().compare(u, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_word;
    use crate::word::reduced_words_up_to;

    fn poly(rank: usize, terms: &[(&[usize], i64)]) -> SquareFreePoly {
        SquareFreePoly::from_terms(rank, terms.iter().map(|(m, c)| (Monomial::from_vars(m), BigInt::from(*c)))).unwrap()
    }

    fn word(s: &str, rank: usize) -> Word {
        parse_word(s, Some(rank)).unwrap()
    }

    /// Full polynomial product followed by dropping repeat monomials.
    fn expand_then_drop(a: &SquareFreePoly, b: &SquareFreePoly) -> SquareFreePoly {
        let mut all: Vec<(Monomial, BigInt)> = Vec::new();
        for (ma, ca) in a.terms() {
            for (mb, cb) in b.terms() {
                all.push((ma.concat(mb), ca * cb));
            }
        }
        SquareFreePoly::from_terms(a.rank(), all).unwrap()
    }

    #[test]
    fn arithmetic_examples() {
        let p = poly(2, &[(&[], 1), (&[1], 1)]);
        let q = poly(2, &[(&[], 1), (&[1], -1)]);
        let r = poly(2, &[(&[], 1), (&[2], 1)]);
        assert!(sf_mul(&p, &q).unwrap().is_one());
        assert_eq!(sf_mul(&p, &q).unwrap(), expand_then_drop(&p, &q));
        assert_eq!(sf_mul(&p, &p).unwrap().to_string(), "1 + 2 X1");
        assert_eq!(sf_mul(&p, &p).unwrap(), expand_then_drop(&p, &p));
        assert_eq!(sf_mul(&p, &r).unwrap().to_string(), "1 + X1 + X2 + X1*X2");
        assert_eq!(sf_add(&p, &q).unwrap().to_string(), "2");
        assert!(matches!(sf_mul(&p, &poly(3, &[])), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn expand_examples() {
        assert_eq!(reduced_expand(&word("x1", 2)).unwrap().to_string(), "1 + X1");
        assert_eq!(reduced_expand(&word("x1^-1", 2)).unwrap().to_string(), "1 - X1");
        assert_eq!(reduced_expand(&word("x1 x2 x1^-1 x2^-1", 2)).unwrap().to_string(), "1 + X1*X2 - X2*X1");
        assert_eq!(reduced_expand(&word("x1 x1", 2)).unwrap().to_string(), "1 + 2 X1");
    }

    #[test]
    fn equality_examples() {
        let rel = word("x1 (x2 x1 x2^-1) x1^-1 (x2 x1^-1 x2^-1)", 2);
        assert!(!rel.is_identity());
        assert!(reduced_equal(&rel, &Word::identity(2)).unwrap());
        assert!(!reduced_equal(&word("x1", 2), &word("x2", 2)).unwrap());
        assert!(!reduced_equal(&word("x1 x2", 2), &word("x2 x1", 2)).unwrap());
    }

    #[test]
    fn compare_examples() {
        let x1 = word("x1", 2);
        assert_eq!(reduced_compare(&x1, &word("x1 x1^-1 x1", 2)).unwrap(), Ordering::Equal);
        assert_eq!(reduced_compare(&word("x2", 2), &x1).unwrap(), Ordering::Less);
        assert_eq!(reduced_compare(&Word::identity(2), &word("x1^2", 2)).unwrap(), Ordering::Less);
    }

    #[test]
    fn rank_guard() {
        let w = Word::generator(11, 1).unwrap();
        assert_eq!(reduced_expand(&w), Err(Error::ReducedRankTooLarge { rank: 11, limit: 10 }));
        assert!(ReducedOrder::new(11).expand(&w).is_ok());
    }

    #[test]
    fn degree_bound_and_inverse_law() {
        for rank in 1..=3 {
            for w in reduced_words_up_to(rank, if rank == 3 { 4 } else { 6 }) {
                let p = reduced_expand(&w).unwrap();
                assert!(p.terms().all(|(m, _)| m.degree() <= rank && m.is_square_free()));
                let q = reduced_expand(&w.invert()).unwrap();
                assert!(sf_mul(&p, &q).unwrap().is_one(), "{w}");
            }
        }
    }
}
