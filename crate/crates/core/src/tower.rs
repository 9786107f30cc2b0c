//! Iterated semidirect products of free and reduced free factors.
//!
//! Factors are numbered `1..=ℓ`; factor 1 is the quotient end. Generator `p`
//! of factor `i` is written `g<i>.<p>`. For `i < k` each generator `x` of
//! factor `i` carries an endomorphism table `φ_x` of factor `k` (and its
//! inverse) with the defining relation `x^-1 y x = φ_x(y)`.
//!
//! Elements are kept in the normal form `w_ℓ · w_{ℓ-1} ⋯ w_1`, one word per
//! factor, with factor 1 rightmost. The ordering compares component 1 first,
//! then component 2, and so on, each with its factor's Magnus ordering.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::automorphism::{verify_inverse_pair, EndoTable};
use crate::error::{Error, Result};
use crate::magnus::MagnusOrder;
use crate::monomial::Monomial;
use crate::parse::{parse_raw, Symbol};
use crate::reduced::ReducedOrder;
use crate::word::{write_syllables, AbVector, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorKind {
    Free,
    #[serde(rename = "reduced")]
    ReducedFree,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Factor {
    pub rank: usize,
    pub kind: FactorKind,
}

impl Factor {
    pub fn free(rank: usize) -> Self {
        Factor { rank, kind: FactorKind::Free }
    }

    pub fn reduced(rank: usize) -> Self {
        Factor { rank, kind: FactorKind::ReducedFree }
    }
}

/// Generator `source_generator` of `source_factor` acting on `target_factor`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ActionKey {
    pub source_factor: usize,
    pub source_generator: usize,
    pub target_factor: usize,
}

impl fmt::Display for ActionKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "g{}.{} on factor {}", self.source_factor, self.source_generator, self.target_factor)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionPair {
    pub table: EndoTable,
    pub inverse: EndoTable,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerSpec {
    factors: Vec<Factor>,
    actions: BTreeMap<ActionKey, ActionPair>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    RankMismatch { key: ActionKey, expected: usize, found: usize },
    NotIa { key: ActionKey },
    InverseMismatch { key: ActionKey },
    /// The tables on `target_factor` do not respect the relation between
    /// `g<lower.0>.<lower.1>` and `g<middle.0>.<middle.1>`; `generator` is the
    /// first target generator where the two sides differ.
    Incompatible { lower: (usize, usize), middle: (usize, usize), target_factor: usize, generator: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RankMismatch { key, expected, found } => {
                write!(f, "{key}: table has rank {found}, factor has rank {expected}")
            }
            Violation::NotIa { key } => write!(f, "{key}: action is not trivial on the abelianization"),
            Violation::InverseMismatch { key } => write!(f, "{key}: inverse table does not invert the table"),
            Violation::Incompatible { lower, middle, target_factor, generator } => write!(
                f,
                "actions on factor {target_factor} violate the relation of g{}.{} with g{}.{} (at x{generator})",
                lower.0, lower.1, middle.0, middle.1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl TowerSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidSpec("a tower needs at least one factor".into()));
        }
        if factors.iter().any(|f| f.rank == 0) {
            return Err(Error::ZeroRank);
        }
        Ok(TowerSpec { factors, actions: BTreeMap::new() })
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factor(&self, index: usize) -> &Factor {
        &self.factors[index - 1]
    }

    pub fn actions(&self) -> impl Iterator<Item = (&ActionKey, &ActionPair)> {
        self.actions.iter()
    }

    pub fn action(&self, key: &ActionKey) -> Option<&ActionPair> {
        self.actions.get(key)
    }

    /// Installs the action of `g<source_factor>.<source_generator>` on
    /// `target_factor`. Table ranks are checked by [`TowerSpec::validate`].
    pub fn set_action(&mut self, key: ActionKey, table: EndoTable, inverse: EndoTable) -> Result<()> {
        let n = self.factors.len();
        if key.source_factor == 0 || key.target_factor > n || key.source_factor >= key.target_factor {
            return Err(Error::InvalidSpec(format!(
                "action {key}: need 1 <= source factor < target factor <= {n}"
            )));
        }
        let rank = self.factor(key.source_factor).rank;
        if key.source_generator == 0 || key.source_generator > rank {
            return Err(Error::UnknownGenerator { factor: key.source_factor, generator: key.source_generator });
        }
        if table.is_identity() && inverse.is_identity() {
            self.actions.remove(&key);
        } else {
            self.actions.insert(key, ActionPair { table, inverse });
        }
        Ok(())
    }

    fn table(&self, key: &ActionKey) -> Option<&EndoTable> {
        self.actions.get(key).map(|a| &a.table)
    }

    fn inverse_table(&self, key: &ActionKey) -> Option<&EndoTable> {
        self.actions.get(key).map(|a| &a.inverse)
    }

    fn owned_table(&self, key: &ActionKey, inverse: bool) -> EndoTable {
        let rank = self.factor(key.target_factor).rank;
        let t = if inverse { self.inverse_table(key) } else { self.table(key) };
        t.cloned().unwrap_or_else(|| EndoTable::identity(rank))
    }

    /// Lists every violated invariant: table ranks, triviality on the
    /// abelianization, inverse pairs, and compatibility of the actions with
    /// the relations among lower factors.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut rank_ok = true;
        for (key, pair) in &self.actions {
            let expected = self.factor(key.target_factor).rank;
            let found = if pair.table.rank() != expected { pair.table.rank() } else { pair.inverse.rank() };
            if found != expected {
                violations.push(Violation::RankMismatch { key: *key, expected, found });
                rank_ok = false;
                continue;
            }
            if !pair.table.is_ia() || !pair.inverse.is_ia() {
                violations.push(Violation::NotIa { key: *key });
            }
            if !verify_inverse_pair(&pair.table, &pair.inverse) {
                violations.push(Violation::InverseMismatch { key: *key });
            }
        }
        if rank_ok && violations.is_empty() {
            self.check_compatibility(&mut violations);
        }
        ValidationReport { violations }
    }

    /// For `i < j < k` the anti-homomorphism into `Aut(factor k)` must send
    /// `x^-1 y x` and `φ_x(y)` to the same table.
    fn check_compatibility(&self, out: &mut Vec<Violation>) {
        let n = self.factors.len();
        let reduced = ReducedOrder::default();
        for k in 3..=n {
            let target = *self.factor(k);
            for j in 2..k {
                for i in 1..j {
                    for p in 1..=self.factor(i).rank {
                        let kx = ActionKey { source_factor: i, source_generator: p, target_factor: k };
                        let jx = ActionKey { source_factor: i, source_generator: p, target_factor: j };
                        let tx = self.owned_table(&kx, false);
                        let tx_inv = self.owned_table(&kx, true);
                        for q in 1..=self.factor(j).rank {
                            let ky = ActionKey { source_factor: j, source_generator: q, target_factor: k };
                            let ty = self.owned_table(&ky, false);
                            let lhs = tx.compose(&ty).and_then(|t| t.compose(&tx_inv));
                            let image = self
                                .table(&jx)
                                .map(|t| t.image(q).clone())
                                .unwrap_or_else(|| Word::generator(self.factor(j).rank, q).expect("in range"));
                            let rhs = self.anti_image(j, &image, k);
                            let (lhs, rhs) = match (lhs, rhs) {
                                (Ok(l), Ok(r)) => (l, r),
                                _ => {
                                    out.push(Violation::Incompatible { lower: (i, p), middle: (j, q), target_factor: k, generator: 1 });
                                    continue;
                                }
                            };
                            let first_bad = (1..=target.rank).find(|&g| {
                                let (a, b) = (lhs.image(g), rhs.image(g));
                                match target.kind {
                                    FactorKind::Free => a != b,
                                    FactorKind::ReducedFree => !reduced.equal(a, b).unwrap_or(false),
                                }
                            });
                            if let Some(generator) = first_bad {
                                out.push(Violation::Incompatible { lower: (i, p), middle: (j, q), target_factor: k, generator });
                            }
                        }
                    }
                }
            }
        }
    }

    /// `α(l_m) ∘ ⋯ ∘ α(l_1)` for the word `l_1 ⋯ l_m` of factor `source`.
    fn anti_image(&self, source: usize, w: &Word, target: usize) -> Result<EndoTable> {
        let mut acc = EndoTable::identity(self.factor(target).rank);
        for (g, s) in w.letters() {
            let key = ActionKey { source_factor: source, source_generator: g, target_factor: target };
            let t = self.owned_table(&key, s < 0);
            acc = t.compose(&acc)?;
        }
        Ok(acc)
    }
}

/// An element in normal form; `components[i - 1]` is the word in factor `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TowerElement {
    components: Vec<Word>,
}

impl TowerElement {
    pub fn components(&self) -> &[Word] {
        &self.components
    }

    pub fn component(&self, factor: usize) -> &Word {
        &self.components[factor - 1]
    }

    pub fn is_identity(&self) -> bool {
        self.components.iter().all(Word::is_identity)
    }

    /// Total letter length over all components.
    pub fn len(&self) -> usize {
        self.components.iter().map(Word::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    /// The normal form as a product of tower generators, factor ℓ first.
    pub fn letters(&self) -> Vec<(usize, usize, i64)> {
        let mut out = Vec::new();
        for (i, w) in self.components.iter().enumerate().rev() {
            out.extend(w.syllables().iter().map(|&(g, e)| (i + 1, g, e)));
        }
        out
    }
}

impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let syllables: Vec<(usize, i64)> = self.letters().iter().enumerate().map(|(k, &(_, _, e))| (k, e)).collect();
        let names = self.letters();
        write_syllables(f, &syllables, |f, k| write!(f, "g{}.{}", names[k].0, names[k].1))
    }
}

/// Exponent-sum vectors, one block per factor, block 1 first.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TowerAb(pub Vec<AbVector>);

impl TowerAb {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(AbVector::is_zero)
    }

    /// Eastern lexicographic comparison: block 1 first, entries in index order.
    pub fn cmp_lex(&self, other: &TowerAb) -> Ordering {
        self.cmp(other)
    }

    pub fn drop_last(&self) -> TowerAb {
        TowerAb(self.0[..self.0.len().saturating_sub(1)].to_vec())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TowerDecision {
    pub ordering: Ordering,
    /// Deciding factor (1-based) and monomial; `None` for equal elements.
    pub factor: Option<usize>,
    pub monomial: Option<Monomial>,
}

/// A validated tower together with the comparators for its factors.
#[derive(Debug, Clone)]
pub struct Tower {
    spec: TowerSpec,
    magnus: MagnusOrder,
    reduced: ReducedOrder,
}

impl Tower {
    pub fn new(spec: TowerSpec) -> Result<Self> {
        let report = spec.validate();
        if !report.is_valid() {
            return Err(Error::InvalidSpec(report.to_string()));
        }
        Ok(Tower { spec, magnus: MagnusOrder::default(), reduced: ReducedOrder::default() })
    }

    /// A tower with a single free (or reduced free) factor.
    pub fn single(factor: Factor) -> Result<Self> {
        Tower::new(TowerSpec::new(vec![factor])?)
    }

    pub fn with_orders(mut self, magnus: MagnusOrder, reduced: ReducedOrder) -> Self {
        self.magnus = magnus;
        self.reduced = reduced;
        self
    }

    pub fn spec(&self) -> &TowerSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.spec.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spec.is_empty()
    }

    pub fn factor(&self, index: usize) -> &Factor {
        self.spec.factor(index)
    }

    pub fn magnus_order(&self) -> &MagnusOrder {
        &self.magnus
    }

    pub fn reduced_order(&self) -> &ReducedOrder {
        &self.reduced
    }

    pub fn identity(&self) -> TowerElement {
        TowerElement { components: self.spec.factors.iter().map(|f| Word::identity(f.rank)).collect() }
    }

    pub fn generator(&self, factor: usize, generator: usize) -> Result<TowerElement> {
        self.normalize(&[(factor, generator, 1)])
    }

    /// Wraps explicit components (factor 1 first) as an element; any tuple of
    /// words is a normal form.
    pub fn element(&self, components: Vec<Word>) -> Result<TowerElement> {
        if components.len() != self.len() {
            return Err(Error::SpecMismatch(format!("{} components for {} factors", components.len(), self.len())));
        }
        for (i, w) in components.iter().enumerate() {
            if w.rank() != self.spec.factors[i].rank {
                return Err(Error::SpecMismatch(format!("component {} has rank {}", i + 1, w.rank())));
            }
        }
        Ok(TowerElement { components })
    }

    /// A single-factor tower element embedded in the tower.
    pub fn embed(&self, factor: usize, w: &Word) -> Result<TowerElement> {
        let mut g = self.identity();
        if factor == 0 || factor > self.len() {
            return Err(Error::SpecMismatch(format!("no factor {factor}")));
        }
        if w.rank() != self.factor(factor).rank {
            return Err(Error::RankMismatch { left: self.factor(factor).rank, right: w.rank() });
        }
        g.components[factor - 1] = w.clone();
        Ok(g)
    }

    fn check(&self, g: &TowerElement) -> Result<()> {
        if g.components.len() != self.len()
            || g.components.iter().zip(&self.spec.factors).any(|(w, f)| w.rank() != f.rank)
        {
            return Err(Error::SpecMismatch("element shape does not match the tower".into()));
        }
        Ok(())
    }

    fn apply_power(&self, key: &ActionKey, inverse: bool, times: u64, z: Word) -> Result<Word> {
        let t = if inverse { self.spec.inverse_table(key) } else { self.spec.table(key) };
        let Some(t) = t else { return Ok(z) };
        let mut z = z;
        for _ in 0..times {
            z = t.apply(&z)?;
        }
        Ok(z)
    }

    /// `u^-1 z u` for `u` in factor `source` and `z` in factor `target > source`.
    pub fn act(&self, source: usize, u: &Word, target: usize, z: &Word) -> Result<Word> {
        let mut z = z.clone();
        for &(g, e) in u.syllables() {
            let key = ActionKey { source_factor: source, source_generator: g, target_factor: target };
            z = self.apply_power(&key, e < 0, e.unsigned_abs(), z)?;
        }
        Ok(z)
    }

    /// `u z u^-1` for `u` in factor `source` and `z` in factor `target > source`.
    pub fn act_inverse(&self, source: usize, u: &Word, target: usize, z: &Word) -> Result<Word> {
        let mut z = z.clone();
        for &(g, e) in u.syllables().iter().rev() {
            let key = ActionKey { source_factor: source, source_generator: g, target_factor: target };
            z = self.apply_power(&key, e > 0, e.unsigned_abs(), z)?;
        }
        Ok(z)
    }

    /// Right-multiplies `g` in place by a word `z` of factor `i`.
    fn push_component(&self, g: &mut TowerElement, i: usize, z: &Word) -> Result<()> {
        let mut moved = z.clone();
        for lower in 1..i {
            moved = self.act_inverse(lower, &g.components[lower - 1], i, &moved)?;
        }
        g.components[i - 1].append(&moved)?;
        Ok(())
    }

    /// Normal form of a product of tower generator powers `(factor, generator, exponent)`.
    pub fn normalize(&self, letters: &[(usize, usize, i64)]) -> Result<TowerElement> {
        let mut g = self.identity();
        for &(i, p, e) in letters {
            if i == 0 || i > self.len() || p == 0 || p > self.factor(i).rank {
                return Err(Error::UnknownGenerator { factor: i, generator: p });
            }
            let z = Word::power_of(self.factor(i).rank, p, e)?;
            self.push_component(&mut g, i, &z)?;
        }
        Ok(g)
    }

    /// Parses a word over the tower generators `g<i>.<p>`.
    pub fn parse_element(&self, text: &str) -> Result<TowerElement> {
        let raw = parse_raw(text)?;
        let mut letters = Vec::with_capacity(raw.len());
        for (s, e) in raw {
            match s {
                Symbol::Tower { factor, generator } => letters.push((factor, generator, e)),
                Symbol::Local(i) => {
                    if self.len() == 1 {
                        letters.push((1, i, e));
                    } else {
                        return Err(Error::Parse {
                            column: 1,
                            message: format!("x{i} is ambiguous in a tower; write g<factor>.<generator>"),
                        });
                    }
                }
            }
        }
        self.normalize(&letters)
    }

    pub fn multiply(&self, g: &TowerElement, h: &TowerElement) -> Result<TowerElement> {
        self.check(g)?;
        self.check(h)?;
        let mut out = g.clone();
        for i in (1..=self.len()).rev() {
            let z = h.component(i);
            if !z.is_identity() {
                self.push_component(&mut out, i, z)?;
            }
        }
        Ok(out)
    }

    pub fn invert(&self, g: &TowerElement) -> Result<TowerElement> {
        self.check(g)?;
        let mut out = self.identity();
        for i in 1..=self.len() {
            let z = g.component(i).invert();
            if !z.is_identity() {
                self.push_component(&mut out, i, &z)?;
            }
        }
        Ok(out)
    }

    /// `a g a^-1`.
    pub fn conjugate(&self, g: &TowerElement, a: &TowerElement) -> Result<TowerElement> {
        self.multiply(&self.multiply(a, g)?, &self.invert(a)?)
    }

    pub fn decide(&self, g: &TowerElement, h: &TowerElement) -> Result<TowerDecision> {
        self.check(g)?;
        self.check(h)?;
        for (i, f) in self.spec.factors.iter().enumerate() {
            let (u, v) = (&g.components[i], &h.components[i]);
            let d = match f.kind {
                FactorKind::Free => self.magnus.decide(u, v)?,
                FactorKind::ReducedFree => self.reduced.decide(u, v)?,
            };
            if d.ordering != Ordering::Equal {
                return Ok(TowerDecision { ordering: d.ordering, factor: Some(i + 1), monomial: d.monomial });
            }
        }
        Ok(TowerDecision { ordering: Ordering::Equal, factor: None, monomial: None })
    }

    pub fn compare(&self, g: &TowerElement, h: &TowerElement) -> Result<Ordering> {
        self.decide(g, h).map(|d| d.ordering)
    }

    pub fn equal(&self, g: &TowerElement, h: &TowerElement) -> Result<bool> {
        self.compare(g, h).map(|o| o == Ordering::Equal)
    }

    pub fn ab(&self, g: &TowerElement) -> TowerAb {
        TowerAb(g.components.iter().map(Word::exponent_sums).collect())
    }

    /// The quotient tower on factors `1..ℓ-1`.
    pub fn retract_tower(&self) -> Result<Tower> {
        if self.len() == 1 {
            return Err(Error::NoRetraction);
        }
        self.prefix(self.len() - 1)
    }

    /// The tower on factors `1..=k`. It is a quotient: the first `k`
    /// components of a product depend only on the first `k` components of
    /// the operands.
    pub fn prefix(&self, k: usize) -> Result<Tower> {
        if k == 0 || k > self.len() {
            return Err(Error::InvalidSpec(format!("no prefix of length {k} in a tower of {} factors", self.len())));
        }
        let mut spec = TowerSpec::new(self.spec.factors[..k].to_vec())?;
        for (key, pair) in &self.spec.actions {
            if key.target_factor <= k {
                spec.actions.insert(*key, pair.clone());
            }
        }
        Ok(Tower { spec, magnus: self.magnus.clone(), reduced: self.reduced })
    }

    /// Image of `g` in [`Tower::prefix`]`(k)`.
    pub fn truncate(&self, g: &TowerElement, k: usize) -> Result<TowerElement> {
        self.check(g)?;
        if k == 0 || k > self.len() {
            return Err(Error::InvalidSpec(format!("no prefix of length {k} in a tower of {} factors", self.len())));
        }
        Ok(TowerElement { components: g.components[..k].to_vec() })
    }

    /// Drops the kernel factor ℓ.
    pub fn retraction(&self, g: &TowerElement) -> Result<TowerElement> {
        self.check(g)?;
        if self.len() == 1 {
            return Err(Error::NoRetraction);
        }
        Ok(TowerElement { components: g.components[..self.len() - 1].to_vec() })
    }
}
