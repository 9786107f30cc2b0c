//! Text syntax for words.
//!
//! ```text
//! product := ws* [ factor ( sep factor )* ] ws*
//! sep     := ws* [ '*' ] ws*
//! factor  := atom [ ws* '^' ws* integer ]
//! atom    := 'x' digits              generator of a single factor
//!          | 'g' digits '.' digits   generator p of tower factor i (g<i>.<p>)
//!          | '1'                     identity
//!          | '(' product ')'
//! integer := [ '-' | '+' ] digits
//! ```
//!
//! Generator indices start at 1. Columns in error messages are 1-based
//! character positions.

use crate::error::{Error, Result};
use crate::word::{free_reduce, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Symbol {
    Local(usize),
    Tower { factor: usize, generator: usize },
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { column, message: message.into() })
}

impl Parser {
    fn new(src: &str) -> Self {
        Parser { chars: src.chars().collect(), pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn digits(&mut self) -> Result<u64> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return err(self.column(), "expected digits");
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<u64>().or_else(|_| err(start + 1, "number too large"))
    }

    fn index(&mut self) -> Result<usize> {
        let col = self.column();
        let n = self.digits()?;
        if n == 0 {
            return err(col, "generator indices start at 1");
        }
        usize::try_from(n).or_else(|_| err(col, "number too large"))
    }

    fn integer(&mut self) -> Result<i64> {
        let col = self.column();
        let negative = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let n = self.digits()?;
        let n = i64::try_from(n).or_else(|_| err(col, "exponent too large"))?;
        Ok(if negative { -n } else { n })
    }

    fn at_factor_start(&self) -> bool {
        matches!(self.peek(), Some('x' | 'g' | '1' | '('))
    }

    fn product(&mut self, nested: bool) -> Result<Vec<(Symbol, i64)>> {
        let mut out = Vec::new();
        self.skip_ws();
        let mut expect_factor = false;
        let mut seen_factor = false;
        loop {
            self.skip_ws();
            match self.peek() {
                None => {
                    if nested {
                        return err(self.column(), "unclosed '('");
                    }
                    break;
                }
                Some(')') if nested => break,
                Some('*') => {
                    if !seen_factor || expect_factor {
                        return err(self.column(), "'*' must separate two factors");
                    }
                    self.pos += 1;
                    expect_factor = true;
                    continue;
                }
                Some(_) if self.at_factor_start() => {
                    out.extend(self.factor()?);
                    expect_factor = false;
                    seen_factor = true;
                }
                Some(c) => return err(self.column(), format!("unexpected character '{c}'")),
            }
        }
        if expect_factor {
            return err(self.column(), "expected a factor after '*'");
        }
        Ok(out)
    }

    fn factor(&mut self) -> Result<Vec<(Symbol, i64)>> {
        let col = self.column();
        let base: Vec<(Symbol, i64)> = match self.peek() {
            Some('x') => {
                self.pos += 1;
                vec![(Symbol::Local(self.index()?), 1)]
            }
            Some('g') => {
                self.pos += 1;
                let factor = self.index()?;
                if self.peek() != Some('.') {
                    return err(self.column(), "expected '.' in tower generator g<i>.<p>");
                }
                self.pos += 1;
                let generator = self.index()?;
                vec![(Symbol::Tower { factor, generator }, 1)]
            }
            Some('1') => {
                self.pos += 1;
                if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    return err(col, "unexpected number; generators are written x<i>");
                }
                Vec::new()
            }
            Some('(') => {
                self.pos += 1;
                let inner = self.product(true)?;
                if self.peek() != Some(')') {
                    return err(self.column(), "expected ')'");
                }
                self.pos += 1;
                inner
            }
            _ => return err(col, "expected a generator, '1' or '('"),
        };
        let save = self.pos;
        self.skip_ws();
        if self.peek() == Some('^') {
            self.pos += 1;
            self.skip_ws();
            let e = self.integer()?;
            if base.len() > 1 && base.len().saturating_mul(e.unsigned_abs() as usize) > MAX_EXPANDED_LEN {
                return err(col, "power expands beyond the supported word length");
            }
            return Ok(power(&base, e));
        }
        self.pos = save;
        Ok(base)
    }
}

const MAX_EXPANDED_LEN: usize = 1 << 20;

fn power(base: &[(Symbol, i64)], e: i64) -> Vec<(Symbol, i64)> {
    if base.len() == 1 {
        let (s, b) = base[0];
        return if e == 0 { Vec::new() } else { vec![(s, b.saturating_mul(e))] };
    }
    let unit: Vec<(Symbol, i64)> = if e < 0 {
        base.iter().rev().map(|&(s, b)| (s, -b)).collect()
    } else {
        base.to_vec()
    };
    let mut out = Vec::with_capacity(unit.len() * e.unsigned_abs() as usize);
    for _ in 0..e.unsigned_abs() {
        out.extend_from_slice(&unit);
    }
    out
}

/// Parses text into a raw (unreduced) list of symbol powers.
pub fn parse_raw(text: &str) -> Result<Vec<(Symbol, i64)>> {
    let mut p = Parser::new(text);
    let out = p.product(false)?;
    Ok(out)
}

/// Parses a word over `x1..x<rank>`. When `rank` is `None` it is inferred as
/// the largest generator index that occurs (at least 1).
pub fn parse_word(text: &str, rank: Option<usize>) -> Result<Word> {
    let raw = parse_raw(text)?;
    let mut letters = Vec::with_capacity(raw.len());
    for (s, e) in raw {
        match s {
            Symbol::Local(i) => letters.push((i, e)),
            Symbol::Tower { factor, generator } => {
                return Err(Error::Parse {
                    column: locate(text, |c, _| c == 'g').unwrap_or(1),
                    message: format!("tower generator g{factor}.{generator} used outside a tower context"),
                })
            }
        }
    }
    let rank = rank.unwrap_or_else(|| letters.iter().map(|&(i, _)| i).max().unwrap_or(1));
    free_reduce(&letters, rank).map_err(|e| match e {
        Error::GeneratorOutOfRange { index, rank } => Error::Parse {
            column: locate(text, |c, i| c == 'x' && i == Some(index)).unwrap_or(1),
            message: format!("generator x{index} out of range for rank {rank}"),
        },
        other => other,
    })
}

/// 1-based column of the first symbol whose letter and index satisfy `hit`.
fn locate(text: &str, hit: impl Fn(char, Option<usize>) -> bool) -> Option<usize> {
    let chars: Vec<char> = text.chars().collect();
    (0..chars.len()).find_map(|k| {
        let c = chars[k];
        if c != 'x' && c != 'g' {
            return None;
        }
        let digits: String = chars[k + 1..].iter().take_while(|d| d.is_ascii_digit()).collect();
        hit(c, digits.parse().ok()).then_some(k + 1)
    })
}
