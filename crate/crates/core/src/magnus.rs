//! Truncated Magnus expansions and the Magnus ordering of a free group.
//!
//! The expansion sends `x_i` to `1 + X_i` and `x_i^-1` to
//! `1 - X_i + X_i^2 - ...` in the ring of non-commuting integer power series.
//! Two words are compared by the first monomial, in (degree, lex) order, at
//! which their expansions differ.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::monomial::{format_terms, Monomial};
use crate::word::Word;

pub const DEFAULT_MAX_DEGREE: usize = 64;

/// A power series truncated above `degree`; only terms of degree `<= degree`
/// are meaningful and stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagnusSeries {
    rank: usize,
    degree: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

/// Outcome of comparing two truncated series.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesVerdict {
    LessAt(usize),
    GreaterAt(usize),
    AgreeUpTo(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl From<Ordering> for Sign {
    /// Reads `identity.cmp(w)`.
    fn from(o: Ordering) -> Sign {
        match o {
            Ordering::Less => Sign::Positive,
            Ordering::Equal => Sign::Zero,
            Ordering::Greater => Sign::Negative,
        }
    }
}

/// A comparison result together with the monomial that decided it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub ordering: Ordering,
    /// `None` exactly when the two elements are equal.
    pub monomial: Option<Monomial>,
}

impl Decision {
    pub fn equal() -> Self {
        Decision { ordering: Ordering::Equal, monomial: None }
    }

    pub fn degree(&self) -> Option<usize> {
        self.monomial.as_ref().map(Monomial::degree)
    }
}

impl MagnusSeries {
    pub fn one(rank: usize, degree: usize) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::one(), BigInt::one());
        MagnusSeries { rank, degree, terms }
    }

    /// Builds a series from explicit terms; zero coefficients and terms above
    /// the truncation degree are dropped.
    pub fn from_terms<I>(rank: usize, degree: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, BigInt)>,
    {
        let mut map: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (m, c) in terms {
            if let Some(v) = m.vars().find(|&v| v == 0 || v > rank) {
                return Err(Error::GeneratorOutOfRange { index: v, rank });
            }
            if m.degree() <= degree {
                *map.entry(m).or_insert_with(BigInt::zero) += c;
            }
        }
        map.retain(|_, c| !c.is_zero());
        Ok(MagnusSeries { rank, degree, terms: map })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn degree(&self) -> usize {
        self.degree
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

    pub fn constant(&self) -> BigInt {
        self.coefficient(&Monomial::one())
    }

    /// Drops every term above `degree` (which must not exceed the current one).
    pub fn truncate(&self, degree: usize) -> MagnusSeries {
        let degree = degree.min(self.degree);
        MagnusSeries {
            rank: self.rank,
            degree,
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= degree).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    fn check_rank(&self, other: &MagnusSeries) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    /// `self * (1 + X_var)^exponent`, using the binomial series of the factor.
    fn mul_generator_power(&self, var: usize, exponent: i64) -> MagnusSeries {
        let binomials = binomial_series(exponent, self.degree);
        let mut out: BTreeMap<Monomial, BigInt> = BTreeMap::new();
        for (m, c) in &self.terms {
            let room = self.degree - m.degree();
            for (k, b) in binomials.iter().enumerate().take(room + 1) {
                if b.is_zero() {
                    continue;
                }
                let key = m.with_power(var, k);
                *out.entry(key).or_insert_with(BigInt::zero) += c * b;
            }
        }
        out.retain(|_, c| !c.is_zero());
        MagnusSeries { rank: self.rank, degree: self.degree, terms: out }
    }
}

/// Coefficients of `(1 + X)^e` up to `X^degree`; for negative `e` this is the
/// alternating series of `C(|e| + k - 1, k)`.
fn binomial_series(e: i64, degree: usize) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut b = BigInt::one();
    out.push(b.clone());
    let e = BigInt::from(e);
    for k in 1..=degree {
        let kk = BigInt::from(k);
        b = b * (&e - &kk + BigInt::one()) / &kk;
        out.push(b.clone());
    }
    out
}

pub fn series_add(a: &MagnusSeries, b: &MagnusSeries) -> Result<MagnusSeries> {
    a.check_rank(b)?;
    let degree = a.degree.min(b.degree);
    let mut terms: BTreeMap<Monomial, BigInt> = BTreeMap::new();
    for (m, c) in a.terms.iter().chain(b.terms.iter()) {
        if m.degree() <= degree {
            *terms.entry(m.clone()).or_insert_with(BigInt::zero) += c;
        }
    }
    terms.retain(|_, c| !c.is_zero());
    Ok(MagnusSeries { rank: a.rank, degree, terms })
}

pub fn series_mul(a: &MagnusSeries, b: &MagnusSeries) -> Result<MagnusSeries> {
    a.check_rank(b)?;
    let degree = a.degree.min(b.degree);
    let mut terms: BTreeMap<Monomial, BigInt> = BTreeMap::new();
    for (ma, ca) in &a.terms {
        if ma.degree() > degree {
            break;
        }
        let room = degree - ma.degree();
        for (mb, cb) in &b.terms {
            if mb.degree() > room {
                break;
            }
            *terms.entry(ma.concat(mb)).or_insert_with(BigInt::zero) += ca * cb;
        }
    }
    terms.retain(|_, c| !c.is_zero());
    Ok(MagnusSeries { rank: a.rank, degree, terms })
}

/// Inverse of a series `1 + W` as `1 - W + W^2 - ...`, truncated.
pub fn geometric_inverse(s: &MagnusSeries) -> Result<MagnusSeries> {
    let c = s.constant();
    if !c.is_one() {
        return Err(Error::NotUnipotent(c.to_string()));
    }
    let minus_w = MagnusSeries {
        rank: s.rank,
        degree: s.degree,
        terms: s.terms.iter().filter(|(m, _)| !m.is_one()).map(|(m, c)| (m.clone(), -c)).collect(),
    };
    let mut result = MagnusSeries::one(s.rank, s.degree);
    let mut power = MagnusSeries::one(s.rank, s.degree);
    for _ in 0..s.degree {
        power = series_mul(&power, &minus_w)?;
        if power.is_empty() {
            break;
        }
        result = series_add(&result, &power)?;
    }
    Ok(result)
}

/// The Magnus expansion of `w`, truncated above `degree`.
pub fn magnus_expand(w: &Word, degree: usize) -> MagnusSeries {
    let mut s = MagnusSeries::one(w.rank(), degree);
    for &(g, e) in w.syllables() {
        s = s.mul_generator_power(g, e);
    }
    s
}

/// Scans both series in (degree, lex) order up to the smaller truncation and
/// reports the first monomial with differing coefficients.
pub fn series_compare(a: &MagnusSeries, b: &MagnusSeries) -> Result<SeriesVerdict> {
    Ok(match first_difference(a, b)? {
        Some((m, Ordering::Less)) => SeriesVerdict::LessAt(m.degree()),
        Some((m, _)) => SeriesVerdict::GreaterAt(m.degree()),
        None => SeriesVerdict::AgreeUpTo(a.degree.min(b.degree)),
    })
}

/// The first monomial (in scan order) where `a` and `b` differ, with the
/// ordering of `a`'s coefficient relative to `b`'s.
pub fn first_difference(a: &MagnusSeries, b: &MagnusSeries) -> Result<Option<(Monomial, Ordering)>> {
    a.check_rank(b)?;
    let degree = a.degree.min(b.degree);
    let zero = BigInt::zero();
    let mut ia = a.terms.iter().take_while(|(m, _)| m.degree() <= degree).peekable();
    let mut ib = b.terms.iter().take_while(|(m, _)| m.degree() <= degree).peekable();
    loop {
        let (m, ca, cb) = match (ia.peek(), ib.peek()) {
            (None, None) => return Ok(None),
            (Some(&(ma, ca)), None) => {
                ia.next();
                (ma, ca, &zero)
            }
            (None, Some(&(mb, cb))) => {
                ib.next();
                (mb, &zero, cb)
            }
            (Some(&(ma, ca)), Some(&(mb, cb))) => match ma.cmp(mb) {
                Ordering::Less => {
                    ia.next();
                    (ma, ca, &zero)
                }
                Ordering::Greater => {
                    ib.next();
                    (mb, &zero, cb)
                }
                Ordering::Equal => {
                    ia.next();
                    ib.next();
                    (ma, ca, cb)
                }
            },
        };
        match ca.cmp(cb) {
            Ordering::Equal => continue,
            o => return Ok(Some((m.clone(), o))),
        }
    }
}

impl fmt::Display for MagnusSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_terms(self.terms.iter()))
    }
}

/// Memo table for expansions keyed by `(word, degree)`.
#[derive(Debug, Default)]
pub struct ExpansionCache {
    map: RwLock<HashMap<(Word, usize), Arc<MagnusSeries>>>,
}

impl ExpansionCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get_or_expand(&self, w: &Word, degree: usize) -> Arc<MagnusSeries> {
        let key = (w.clone(), degree);
        if let Some(s) = self.map.read().expect("cache lock").get(&key) {
            return Arc::clone(s);
        }
        let s = Arc::new(magnus_expand(w, degree));
        let mut map = self.map.write().expect("cache lock");
        Arc::clone(map.entry(key).or_insert(s))
    }
}

/// The Magnus ordering comparator with its deepening ceiling and optional
/// expansion cache.
#[derive(Debug, Clone)]
pub struct MagnusOrder {
    max_degree: usize,
    cache: Option<Arc<ExpansionCache>>,
}

impl Default for MagnusOrder {
    fn default() -> Self {
        MagnusOrder { max_degree: DEFAULT_MAX_DEGREE, cache: None }
    }
}

impl MagnusOrder {
    pub fn new(max_degree: usize) -> Self {
        MagnusOrder { max_degree, cache: None }
    }

    pub fn with_cache(mut self, cache: Arc<ExpansionCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    fn expand(&self, w: &Word, degree: usize) -> Arc<MagnusSeries> {
        match &self.cache {
            Some(cache) => cache.get_or_expand(w, degree),
            None => Arc::new(magnus_expand(w, degree)),
        }
    }

    /// Compares `u` and `v`, returning the deciding monomial.
    ///
    /// Equality is settled by free reduction. Otherwise the truncation degree
    /// starts at 2 and doubles. A reduced word of length `L` has a nonzero
    /// coefficient at the degree-`L` monomial that spells its syllables, so
    /// truncation at `|u^-1 v|` always separates; the schedule is capped there.
    pub fn decide(&self, u: &Word, v: &Word) -> Result<Decision> {
        if u.rank() != v.rank() {
            return Err(Error::RankMismatch { left: u.rank(), right: v.rank() });
        }
        if u == v {
            return Ok(Decision::equal());
        }
        let separating = u.invert().multiply(v)?.len();
        let mut degree = 2usize.min(separating);
        loop {
            if degree > self.max_degree {
                return Err(Error::DepthExceeded { max_degree: self.max_degree });
            }
            let a = self.expand(u, degree);
            let b = self.expand(v, degree);
            if let Some((m, ordering)) = first_difference(&a, &b)? {
                return Ok(Decision { ordering, monomial: Some(m) });
            }
            if degree >= separating {
                unreachable!("distinct words agree at the separating degree {separating}");
            }
            degree = (degree * 2).min(separating);
        }
    }

    pub fn compare(&self, u: &Word, v: &Word) -> Result<Ordering> {
        self.decide(u, v).map(|d| d.ordering)
    }

    pub fn sign(&self, w: &Word) -> Result<Sign> {
        self.compare(&Word::identity(w.rank()), w).map(Sign::from)
    }
}

pub fn magnus_compare(u: &Word, v: &Word) -> Result<Ordering> {
    MagnusOrder::default().compare(u, v)
}

pub fn sign(w: &Word) -> Result<Sign> {
    MagnusOrder::default().sign(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_word;
    use crate::word::reduced_words_up_to;

    fn series(rank: usize, degree: usize, terms: &[(&[usize], i64)]) -> MagnusSeries {
        MagnusSeries::from_terms(rank, degree, terms.iter().map(|(m, c)| (Monomial::from_vars(m), BigInt::from(*c)))).unwrap()
    }

    fn word(s: &str, rank: usize) -> Word {
        parse_word(s, Some(rank)).unwrap()
    }

    /// Letter-by-letter product of dense truncated series, independent of the
    /// binomial fast path.
    fn oracle_expand(w: &Word, degree: usize) -> BTreeMap<Vec<usize>, i128> {
        let mut acc: BTreeMap<Vec<usize>, i128> = BTreeMap::new();
        acc.insert(Vec::new(), 1);
        for (g, s) in w.letters() {
            let factor: Vec<(Vec<usize>, i128)> = if s > 0 {
                vec![(vec![], 1), (vec![g], 1)]
            } else {
                (0..=degree).map(|k| (vec![g; k], if k % 2 == 0 { 1 } else { -1 })).collect()
            };
            let mut next: BTreeMap<Vec<usize>, i128> = BTreeMap::new();
            for (m, c) in &acc {
                for (f, d) in &factor {
                    if m.len() + f.len() <= degree {
                        let mut key = m.clone();
                        key.extend(f);
                        *next.entry(key).or_default() += c * d;
                    }
                }
            }
            next.retain(|_, c| *c != 0);
            acc = next;
        }
        acc
    }

    fn as_dense(s: &MagnusSeries) -> BTreeMap<Vec<usize>, i128> {
        s.terms().map(|(m, c)| (m.vars().collect(), i128::try_from(c.clone()).unwrap())).collect()
    }

    #[test]
    fn arithmetic_examples() {
        let a = series(2, 2, &[(&[], 1), (&[1], 1)]);
        let b = series(2, 2, &[(&[], 1), (&[1], -1), (&[1, 1], 1)]);
        assert_eq!(series_mul(&a, &b).unwrap(), MagnusSeries::one(2, 2));
        let c = series(2, 2, &[(&[], 1), (&[2], 1)]);
        assert_eq!(series_mul(&a, &c).unwrap().to_string(), "1 + X1 + X2 + X1*X2");
        assert_eq!(series_mul(&a, &a).unwrap().to_string(), "1 + 2 X1 + X1^2");
        assert_eq!(series_add(&a, &c).unwrap().to_string(), "2 + X1 + X2");
    }

    #[test]
    fn arithmetic_truncates_to_smaller_degree() {
        let a = series(1, 3, &[(&[], 1), (&[1], 1)]);
        let b = series(1, 1, &[(&[], 1), (&[1], 1)]);
        let p = series_mul(&a, &b).unwrap();
        assert_eq!(p.degree(), 1);
        assert_eq!(p.to_string(), "1 + 2 X1");
        assert!(matches!(series_mul(&a, &series(2, 2, &[(&[], 1)])), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn geometric_inverse_examples() {
        assert_eq!(geometric_inverse(&MagnusSeries::one(2, 3)).unwrap(), MagnusSeries::one(2, 3));
        let s = series(1, 3, &[(&[], 1), (&[1], 1)]);
        assert_eq!(geometric_inverse(&s).unwrap().to_string(), "1 - X1 + X1^2 - X1^3");
        let t = series(2, 4, &[(&[], 1), (&[1, 2], 1)]);
        let inv = geometric_inverse(&t).unwrap();
        assert_eq!(inv.to_string(), "1 - X1*X2 + X1*X2*X1*X2");
        assert_eq!(series_mul(&t, &inv).unwrap(), MagnusSeries::one(2, 4));
        assert_eq!(series_mul(&inv, &t).unwrap(), MagnusSeries::one(2, 4));
        let bad = series(1, 2, &[(&[], 2)]);
        assert!(matches!(geometric_inverse(&bad), Err(Error::NotUnipotent(_))));
    }

    #[test]
    fn expand_examples() {
        assert_eq!(magnus_expand(&word("x1", 2), 2).to_string(), "1 + X1");
        assert_eq!(magnus_expand(&word("x1^-1", 1), 3).to_string(), "1 - X1 + X1^2 - X1^3");
        let comm = word("x1 x2 x1^-1 x2^-1", 2);
        // oracle: product of the four letter series built with geometric_inverse
        let x1 = series(2, 2, &[(&[], 1), (&[1], 1)]);
        let x2 = series(2, 2, &[(&[], 1), (&[2], 1)]);
        let direct = [x1.clone(), x2.clone(), geometric_inverse(&x1).unwrap(), geometric_inverse(&x2).unwrap()]
            .iter()
            .try_fold(MagnusSeries::one(2, 2), |acc, s| series_mul(&acc, s))
            .unwrap();
        assert_eq!(direct.to_string(), "1 + X1*X2 - X2*X1");
        assert_eq!(magnus_expand(&comm, 2), direct);
        assert_eq!(magnus_expand(&Word::identity(3), 5), MagnusSeries::one(3, 5));
    }

    #[test]
    fn expand_agrees_with_letter_oracle() {
        for w in reduced_words_up_to(2, 4) {
            for degree in 0..=5 {
                assert_eq!(as_dense(&magnus_expand(&w, degree)), oracle_expand(&w, degree), "{w} at {degree}");
            }
        }
        let w = word("x1^5 x2^-4 x1^-3", 2);
        assert_eq!(as_dense(&magnus_expand(&w, 7)), oracle_expand(&w, 7));
    }

    #[test]
    fn series_compare_examples() {
        let a = series(2, 3, &[(&[], 1), (&[1], 1)]);
        let b = series(2, 3, &[(&[], 1), (&[2], 1)]);
        assert_eq!(series_compare(&a, &b).unwrap(), SeriesVerdict::GreaterAt(1));
        assert_eq!(series_compare(&a, &a).unwrap(), SeriesVerdict::AgreeUpTo(3));
        let one = MagnusSeries::one(2, 3);
        assert_eq!(series_compare(&one, &a).unwrap(), SeriesVerdict::LessAt(1));
        let c = series(2, 1, &[(&[], 1), (&[1, 2], 1)]);
        assert_eq!(series_compare(&one, &c).unwrap(), SeriesVerdict::AgreeUpTo(1));
    }

    #[test]
    fn compare_examples() {
        let x1 = word("x1", 2);
        let x2 = word("x2", 2);
        assert_eq!(magnus_compare(&x1, &x1).unwrap(), Ordering::Equal);
        assert_eq!(magnus_compare(&x2, &x1).unwrap(), Ordering::Less);
        let d = MagnusOrder::default().decide(&x2, &x1).unwrap();
        assert_eq!(d.monomial, Some(Monomial::var(1)));
        let comm = word("x1 x2 x1^-1 x2^-1", 2);
        let d = MagnusOrder::default().decide(&Word::identity(2), &comm).unwrap();
        assert_eq!(d.ordering, Ordering::Less);
        assert_eq!(d.monomial, Some(Monomial::from_vars(&[1, 2])));
        assert!(matches!(magnus_compare(&x1, &word("x1", 3)), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn sign_examples() {
        assert_eq!(sign(&Word::identity(2)).unwrap(), Sign::Zero);
        assert_eq!(sign(&word("x1", 2)).unwrap(), Sign::Positive);
        assert_eq!(sign(&word("x1^-1", 2)).unwrap(), Sign::Negative);
    }

    #[test]
    fn positive_translation_sanity() {
        let x1 = word("x1", 2);
        let x2 = word("x2", 2);
        // X1 precedes X2, so x2 < x1
        assert_eq!(magnus_compare(&x2, &x1).unwrap(), Ordering::Less);
        let x1x2 = x1.multiply(&x2).unwrap();
        assert_eq!(magnus_compare(&x1x2, &x2).unwrap(), Ordering::Greater);
    }

    #[test]
    fn depth_ceiling_is_reported() {
        // [[x1,x2],x1] lives in the third lower central term: degree 3 decides
        let c = word("x1 x2 x1^-1 x2^-1", 2);
        let cc = Word::commutator(&c, &word("x1", 2)).unwrap();
        let shallow = MagnusOrder::new(2);
        assert_eq!(shallow.compare(&Word::identity(2), &cc), Err(Error::DepthExceeded { max_degree: 2 }));
        assert!(MagnusOrder::default().compare(&Word::identity(2), &cc).is_ok());
    }

    #[test]
    fn cache_is_transparent() {
        let cache = Arc::new(ExpansionCache::new());
        let cached = MagnusOrder::default().with_cache(Arc::clone(&cache));
        let plain = MagnusOrder::default();
        let words = reduced_words_up_to(2, 3);
        for u in &words {
            for v in &words {
                assert_eq!(cached.decide(u, v).unwrap(), plain.decide(u, v).unwrap());
            }
        }
        assert!(!cache.is_empty());
        for u in &words {
            for v in &words {
                assert_eq!(cached.decide(u, v).unwrap(), plain.decide(u, v).unwrap());
            }
        }
    }
}
