//! Freely reduced words in a single free factor.
//!
//! A [`Word`] is stored in run-length form: a list of syllables
//! `(generator, exponent)` with nonzero exponents and no two adjacent
//! syllables on the same generator. Generators are numbered from 1.

use std::fmt;
use std::ops::Add;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    rank: usize,
    syllables: Vec<(usize, i64)>,
}

/// Exponent sum of every generator: the image of a word in `Z^rank`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AbVector(pub Vec<i64>);

impl AbVector {
    pub fn zero(rank: usize) -> Self {
        AbVector(vec![0; rank])
    }

    pub fn basis(rank: usize, index: usize) -> Self {
        let mut v = vec![0; rank];
        v[index - 1] = 1;
        AbVector(v)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Add for &AbVector {
    type Output = AbVector;

    fn add(self, rhs: &AbVector) -> AbVector {
        assert_eq!(self.0.len(), rhs.0.len(), "abelian vectors of different rank");
        AbVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

fn push_syllable(out: &mut Vec<(usize, i64)>, generator: usize, exponent: i64) -> Result<()> {
    if exponent == 0 {
        return Ok(());
    }
    match out.last_mut() {
        Some(last) if last.0 == generator => {
            let merged = last.1.checked_add(exponent).ok_or(Error::ExponentOverflow)?;
            if merged == 0 {
                out.pop();
            } else {
                last.1 = merged;
            }
        }
        _ => out.push((generator, exponent)),
    }
    Ok(())
}

/// Freely reduces a raw sequence of generator powers.
///
/// Each entry is `(generator, exponent)`; a signed occurrence is an entry with
/// exponent `±1`, but arbitrary exponents (including 0) are accepted.
pub fn free_reduce(raw: &[(usize, i64)], rank: usize) -> Result<Word> {
    if rank == 0 {
        return Err(Error::ZeroRank);
    }
    let mut out = Vec::with_capacity(raw.len());
    for &(generator, exponent) in raw {
        if generator == 0 || generator > rank {
            return Err(Error::GeneratorOutOfRange { index: generator, rank });
        }
        push_syllable(&mut out, generator, exponent)?;
    }
    Ok(Word { rank, syllables: out })
}

impl Word {
    pub fn identity(rank: usize) -> Self {
        assert!(rank > 0, "free factor of rank 0");
        Word { rank, syllables: Vec::new() }
    }

    pub fn generator(rank: usize, index: usize) -> Result<Self> {
        free_reduce(&[(index, 1)], rank)
    }

    pub fn power_of(rank: usize, index: usize, exponent: i64) -> Result<Self> {
        free_reduce(&[(index, exponent)], rank)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn syllables(&self) -> &[(usize, i64)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of letters, counting `x^e` as `|e|` letters.
    pub fn len(&self) -> usize {
        self.syllables.iter().map(|&(_, e)| e.unsigned_abs() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Letters of the word as `(generator, ±1)`.
    pub fn letters(&self) -> impl DoubleEndedIterator<Item = (usize, i64)> + '_ {
        self.syllables
            .iter()
            .flat_map(|&(g, e)| std::iter::repeat_n((g, e.signum()), e.unsigned_abs() as usize))
    }

    fn check_rank(&self, other: &Word) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    pub fn multiply(&self, other: &Word) -> Result<Word> {
        let mut out = self.clone();
        out.append(other)?;
        Ok(out)
    }

    /// In-place right multiplication.
    pub fn append(&mut self, other: &Word) -> Result<()> {
        self.check_rank(other)?;
        self.syllables.reserve(other.syllables.len());
        for &(g, e) in &other.syllables {
            push_syllable(&mut self.syllables, g, e)?;
        }
        Ok(())
    }

    pub fn invert(&self) -> Word {
        Word {
            rank: self.rank,
            syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn pow(&self, exponent: i64) -> Result<Word> {
        let base = if exponent < 0 { self.invert() } else { self.clone() };
        let mut out = Word::identity(self.rank);
        for _ in 0..exponent.unsigned_abs() {
            out.append(&base)?;
        }
        Ok(out)
    }

    /// `self^-1 * other * self`.
    pub fn conjugate_by(&self, conjugator: &Word) -> Result<Word> {
        conjugator.invert().multiply(self)?.multiply(conjugator)
    }

    /// The commutator `[a, b] = a b a^-1 b^-1`.
    pub fn commutator(a: &Word, b: &Word) -> Result<Word> {
        a.multiply(b)?.multiply(&a.invert())?.multiply(&b.invert())
    }

    pub fn exponent_sums(&self) -> AbVector {
        let mut v = vec![0i64; self.rank];
        for &(g, e) in &self.syllables {
            v[g - 1] += e;
        }
        AbVector(v)
    }

    /// Reinterprets the word in a factor of larger (or equal) rank.
    pub fn with_rank(&self, rank: usize) -> Result<Word> {
        free_reduce(&self.syllables, rank)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_syllables(f, &self.syllables, |f, g| write!(f, "x{g}"))
    }
}

pub(crate) fn write_syllables<F>(f: &mut fmt::Formatter<'_>, syllables: &[(usize, i64)], mut name: F) -> fmt::Result
where
    F: FnMut(&mut fmt::Formatter<'_>, usize) -> fmt::Result,
{
    if syllables.is_empty() {
        return f.write_str("1");
    }
    for (k, &(g, e)) in syllables.iter().enumerate() {
        if k > 0 {
            f.write_str(" ")?;
        }
        name(f, g)?;
        if e != 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

/// Every freely reduced word of letter length exactly `len` in the given rank,
/// in a fixed deterministic order.
pub fn reduced_words_of_length(rank: usize, len: usize) -> Vec<Word> {
    let letters: Vec<(usize, i64)> = (1..=rank).flat_map(|g| [(g, 1), (g, -1)]).collect();
    let mut current: Vec<Vec<(usize, i64)>> = vec![Vec::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(current.len() * (2 * rank - 1).max(1));
        for w in &current {
            for &(g, s) in &letters {
                if let Some(&(lg, ls)) = w.last() {
                    if lg == g && ls == -s {
                        continue;
                    }
                }
                let mut v = w.clone();
                v.push((g, s));
                next.push(v);
            }
        }
        current = next;
    }
    current
        .into_iter()
        .map(|raw| free_reduce(&raw, rank).expect("letters are in range"))
        .collect()
}

/// Every freely reduced word of letter length at most `max_len`.
pub fn reduced_words_up_to(rank: usize, max_len: usize) -> Vec<Word> {
    (0..=max_len).flat_map(|l| reduced_words_of_length(rank, l)).collect()
}
