//! Endomorphisms of a free factor given by the images of its generators.

use std::fmt;

use crate::error::{Error, Result};
use crate::parse::parse_word;
use crate::word::{AbVector, Word};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EndoTable {
    rank: usize,
    images: Vec<Word>,
}

impl EndoTable {
    pub fn new(rank: usize, images: Vec<Word>) -> Result<Self> {
        if rank == 0 {
            return Err(Error::ZeroRank);
        }
        if images.len() != rank {
            return Err(Error::TableLength { rank, images: images.len() });
        }
        if let Some(w) = images.iter().find(|w| w.rank() != rank) {
            return Err(Error::RankMismatch { left: rank, right: w.rank() });
        }
        Ok(EndoTable { rank, images })
    }

    pub fn identity(rank: usize) -> Self {
        let images = (1..=rank).map(|g| Word::generator(rank, g).expect("in range")).collect();
        EndoTable { rank, images }
    }

    /// `x_target -> w^-1 x_target w`, all other generators fixed.
    pub fn conjugate_generator(rank: usize, target: usize, by: &Word) -> Result<Self> {
        let mut t = Self::identity(rank);
        let x = Word::generator(rank, target)?;
        t.images[target - 1] = x.conjugate_by(by)?;
        Ok(t)
    }

    /// `x_i -> x_j^-1 x_i x_j`.
    pub fn elementary_conjugation(rank: usize, i: usize, j: usize) -> Result<Self> {
        Self::conjugate_generator(rank, i, &Word::generator(rank, j)?)
    }

    /// `x_k -> w^-1 x_k w` for `k <= upto`, fixing the remaining generators.
    pub fn partial_inner(rank: usize, upto: usize, by: &Word) -> Result<Self> {
        let mut t = Self::identity(rank);
        for k in 1..=upto {
            t.images[k - 1] = Word::generator(rank, k)?.conjugate_by(by)?;
        }
        Ok(t)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn image(&self, generator: usize) -> &Word {
        &self.images[generator - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(k, w)| w.syllables() == [(k + 1, 1)])
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        if w.rank() != self.rank {
            return Err(Error::RankMismatch { left: self.rank, right: w.rank() });
        }
        let mut out = Word::identity(self.rank);
        for &(g, e) in w.syllables() {
            let img = self.image(g);
            let piece = if e > 0 { img.clone() } else { img.invert() };
            for _ in 0..e.unsigned_abs() {
                out.append(&piece)?;
            }
        }
        Ok(out)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &EndoTable) -> Result<EndoTable> {
        if self.rank != other.rank {
            return Err(Error::RankMismatch { left: self.rank, right: other.rank });
        }
        let images = other.images.iter().map(|w| self.apply(w)).collect::<Result<Vec<_>>>()?;
        Ok(EndoTable { rank: self.rank, images })
    }

    /// True when every generator's image has exponent-sum vector equal to its
    /// own basis vector, i.e. the map is trivial on the abelianization.
    pub fn is_ia(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(k, w)| w.exponent_sums() == AbVector::basis(self.rank, k + 1))
    }

    /// Parses one `x<i> -> <word>` line per generator; generators without a
    /// line map to themselves. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str, rank: usize) -> Result<Self> {
        let mut t = Self::identity(rank);
        let mut seen = vec![false; rank];
        for (lineno, raw) in text.lines().enumerate() {
            let uncommented = raw.split('#').next().unwrap_or("");
            let lead = uncommented.len() - uncommented.trim_start().len();
            let line = uncommented.trim();
            if line.is_empty() {
                continue;
            }
            let arrow = line.find("->").ok_or_else(|| Error::SpecFile {
                line: lineno + 1,
                column: lead + 1,
                message: "expected `x<i> -> <word>`".into(),
            })?;
            let (lhs, rhs) = (&line[..arrow], &line[arrow + 2..]);
            let at = |offset: usize| {
                move |e: Error| match e {
                    Error::Parse { column, message } => Error::SpecFile { line: lineno + 1, column: column + offset, message },
                    other => other,
                }
            };
            let g = parse_word(lhs, Some(rank)).map_err(at(lead))?;
            let generator = match g.syllables() {
                [(i, 1)] => *i,
                _ => {
                    return Err(Error::SpecFile {
                        line: lineno + 1,
                        column: 1,
                        message: "left side must be a single generator".into(),
                    })
                }
            };
            if std::mem::replace(&mut seen[generator - 1], true) {
                return Err(Error::SpecFile {
                    line: lineno + 1,
                    column: 1,
                    message: format!("x{generator} mapped twice"),
                });
            }
            t.images[generator - 1] = parse_word(rhs, Some(rank)).map_err(at(lead + arrow + 2))?;
        }
        Ok(t)
    }
}

/// True iff both composites are the identity on every generator.
pub fn verify_inverse_pair(t: &EndoTable, t_inv: &EndoTable) -> bool {
    if t.rank != t_inv.rank {
        return false;
    }
    matches!(t.compose(t_inv), Ok(c) if c.is_identity()) && matches!(t_inv.compose(t), Ok(c) if c.is_identity())
}

impl fmt::Display for EndoTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, w) in self.images.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "x{} -> {}", k + 1, w)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::reduced_words_up_to;

    fn word(s: &str, rank: usize) -> Word {
        parse_word(s, Some(rank)).unwrap()
    }

    fn eps() -> EndoTable {
        EndoTable::elementary_conjugation(2, 1, 2).unwrap()
    }

    #[test]
    fn apply_examples() {
        assert_eq!(eps().apply(&word("x1", 2)).unwrap(), word("x2^-1 x1 x2", 2));
        let w = word("x1 x2^-1 x1^3", 2);
        assert_eq!(EndoTable::identity(2).apply(&w).unwrap(), w);
        // x2^-1 x1 x2 . x2 . x2^-1 x1^-1 x2 . x2^-1
        assert_eq!(eps().apply(&word("x1 x2 x1^-1 x2^-1", 2)).unwrap(), word("x2^-1 x1 x2 x1^-1", 2));
        assert!(matches!(eps().apply(&word("x1", 3)), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn compose_examples() {
        let t = eps();
        let id = EndoTable::identity(2);
        assert_eq!(id.compose(&t).unwrap(), t);
        assert_eq!(t.compose(&id).unwrap(), t);
        let by = EndoTable::partial_inner(2, 2, &word("x2", 2)).unwrap();
        let back = EndoTable::partial_inner(2, 2, &word("x2^-1", 2)).unwrap();
        assert!(by.compose(&back).unwrap().is_identity());
    }

    #[test]
    fn compose_matches_sequential_application() {
        let s = EndoTable::parse("x1 -> x1 x2 x1 x2^-1 x1^-1\nx2 -> x1 x2 x1^-1", 2).unwrap();
        let t = eps();
        let st = s.compose(&t).unwrap();
        for w in reduced_words_up_to(2, 3) {
            assert_eq!(st.apply(&w).unwrap(), s.apply(&t.apply(&w).unwrap()).unwrap());
        }
    }

    #[test]
    fn inverse_pair_examples() {
        let id = EndoTable::identity(2);
        assert!(verify_inverse_pair(&id, &id));
        let inv = EndoTable::conjugate_generator(2, 1, &word("x2^-1", 2)).unwrap();
        assert_eq!(inv.image(1), &word("x2 x1 x2^-1", 2));
        assert!(verify_inverse_pair(&eps(), &inv));
        assert!(!verify_inverse_pair(&eps(), &id));
    }

    #[test]
    fn ia_examples() {
        assert!(eps().is_ia());
        assert!(!EndoTable::parse("x1 -> x1 x2", 2).unwrap().is_ia());
        assert!(!EndoTable::parse("x1 -> x1^-1", 1).unwrap().is_ia());
    }

    #[test]
    fn apply_is_homomorphism() {
        let t = EndoTable::parse("x1 -> x2^-1 x1^2 x2 x1^-1\nx2 -> x2 x1", 2).unwrap();
        let words = reduced_words_up_to(2, 3);
        for u in &words {
            for v in &words {
                let lhs = t.apply(&u.multiply(v).unwrap()).unwrap();
                let rhs = t.apply(u).unwrap().multiply(&t.apply(v).unwrap()).unwrap();
                assert_eq!(lhs, rhs);
            }
        }
    }

    #[test]
    fn ia_closed_under_composition() {
        let gens: Vec<EndoTable> = [(1, 2), (2, 1), (1, 3), (3, 2)]
            .iter()
            .map(|&(i, j)| EndoTable::elementary_conjugation(3, i, j).unwrap())
            .chain([EndoTable::parse("x1 -> x1 x2 x3 x2^-1 x3^-1", 3).unwrap()])
            .collect();
        for s in &gens {
            for t in &gens {
                assert!(s.compose(t).unwrap().is_ia());
            }
        }
    }

    #[test]
    fn parse_and_display() {
        let t = EndoTable::parse("# eps12\nx1 -> x2^-1 x1 x2\n\n", 2).unwrap();
        assert_eq!(t, eps());
        assert_eq!(t.to_string(), "x1 -> x2^-1 x1 x2\nx2 -> x2");
        assert!(matches!(EndoTable::parse("x1 x2", 2), Err(Error::SpecFile { line: 1, .. })));
        assert!(matches!(EndoTable::parse("x1 -> x1\nx1 -> x2", 2), Err(Error::SpecFile { line: 2, .. })));
        assert!(matches!(EndoTable::parse("x1 -> x1 y", 2), Err(Error::SpecFile { line: 1, column: 10, .. })));
        assert!(matches!(EndoTable::new(2, vec![Word::identity(2)]), Err(Error::TableLength { .. })));
    }
}
