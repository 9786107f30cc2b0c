//! Towers for pure braid groups, upper McCool groups, partial inner
//! automorphism groups and pure monomial braid groups.
//!
//! Factor 1 is always the quotient end. For a family written as
//! `⋊_{j} F_{r_j}` with the kernel at the largest `j`, factor `t` here is the
//! free group at the `t`-th smallest `j`.
//!
//! Each bundle may carry a witness: one automorphism of an ambient free group
//! per tower generator. Products of tower generators map to compositions
//! `ρ(gh) = ρ(g) ∘ ρ(h)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::automorphism::{verify_inverse_pair, EndoTable};
use crate::error::{Error, Result};
use crate::tower::{ActionKey, ActionPair, Factor, Tower, TowerElement, TowerSpec, Violation};
use crate::word::{free_reduce, Word};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub ambient_rank: usize,
    /// Keyed by `(factor, generator)`.
    pub generators: BTreeMap<(usize, usize), ActionPair>,
}

impl Witness {
    pub fn image_of_letters(&self, letters: &[(usize, usize, i64)]) -> Result<EndoTable> {
        let mut acc = EndoTable::identity(self.ambient_rank);
        for &(i, p, e) in letters {
            let pair = self.generators.get(&(i, p)).ok_or(Error::UnknownGenerator { factor: i, generator: p })?;
            let t = if e > 0 { &pair.table } else { &pair.inverse };
            for _ in 0..e.unsigned_abs() {
                acc = acc.compose(t)?;
            }
        }
        Ok(acc)
    }

    pub fn image(&self, g: &TowerElement) -> Result<EndoTable> {
        self.image_of_letters(&g.letters())
    }

    /// Image of a word of `factor`.
    pub fn image_of_word(&self, factor: usize, w: &Word) -> Result<EndoTable> {
        let letters: Vec<_> = w.syllables().iter().map(|&(p, e)| (factor, p, e)).collect();
        self.image_of_letters(&letters)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PresetBundle {
    pub name: String,
    pub spec: TowerSpec,
    pub witness: Option<Witness>,
    pub notes: Vec<String>,
}

impl PresetBundle {
    pub fn tower(&self) -> Result<Tower> {
        Tower::new(self.spec.clone())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PresetFailure {
    Spec(Violation),
    MissingWitness { factor: usize, generator: usize },
    WitnessShape { factor: usize, generator: usize },
    WitnessInverse { factor: usize, generator: usize },
    /// `ρ(a)^-1 ρ(b) ρ(a) ≠ ρ(φ_a(b))` for `a = g<source.0>.<source.1>`,
    /// `b = g<target.0>.<target.1>`, first seen on ambient generator `ambient`.
    Relation { source: (usize, usize), target: (usize, usize), ambient: usize },
}

impl fmt::Display for PresetFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PresetFailure::Spec(v) => write!(f, "{v}"),
            PresetFailure::MissingWitness { factor, generator } => write!(f, "no witness for g{factor}.{generator}"),
            PresetFailure::WitnessShape { factor, generator } => {
                write!(f, "witness for g{factor}.{generator} has the wrong ambient rank")
            }
            PresetFailure::WitnessInverse { factor, generator } => {
                write!(f, "witness inverse for g{factor}.{generator} does not invert its table")
            }
            PresetFailure::Relation { source, target, ambient } => write!(
                f,
                "relation of g{}.{} with g{}.{} fails in the witness (at x{ambient})",
                source.0, source.1, target.0, target.1
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PresetReport {
    pub failures: Vec<PresetFailure>,
}

impl PresetReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for PresetReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.failures.is_empty() {
            return f.write_str("clean");
        }
        for (k, v) in self.failures.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Runs [`TowerSpec::validate`] and, with a witness, checks every defining
/// relation `x^-1 y x = φ_x(y)` as an identity of ambient automorphisms.
pub fn validate_preset(b: &PresetBundle) -> PresetReport {
    let mut failures: Vec<PresetFailure> = b.spec.validate().violations.into_iter().map(PresetFailure::Spec).collect();
    let Some(w) = &b.witness else { return PresetReport { failures } };
    let spec = &b.spec;
    let mut shape_ok = true;
    for i in 1..=spec.len() {
        for p in 1..=spec.factor(i).rank {
            match w.generators.get(&(i, p)) {
                None => {
                    failures.push(PresetFailure::MissingWitness { factor: i, generator: p });
                    shape_ok = false;
                }
                Some(pair) if pair.table.rank() != w.ambient_rank || pair.inverse.rank() != w.ambient_rank => {
                    failures.push(PresetFailure::WitnessShape { factor: i, generator: p });
                    shape_ok = false;
                }
                Some(pair) => {
                    if !verify_inverse_pair(&pair.table, &pair.inverse) {
                        failures.push(PresetFailure::WitnessInverse { factor: i, generator: p });
                    }
                }
            }
        }
    }
    if !shape_ok {
        return PresetReport { failures };
    }
    let rank_ok = |k: &ActionKey| {
        spec.action(k).is_none_or(|a| a.table.rank() == spec.factor(k.target_factor).rank)
    };
    for i in 1..spec.len() {
        for p in 1..=spec.factor(i).rank {
            let a = &w.generators[&(i, p)];
            for j in i + 1..=spec.len() {
                let key = ActionKey { source_factor: i, source_generator: p, target_factor: j };
                if !rank_ok(&key) {
                    continue;
                }
                for q in 1..=spec.factor(j).rank {
                    let y = &w.generators[&(j, q)].table;
                    let image = match spec.action(&key) {
                        Some(pair) => pair.table.image(q).clone(),
                        None => Word::generator(spec.factor(j).rank, q).expect("in range"),
                    };
                    let lhs = a.inverse.compose(y).and_then(|t| t.compose(&a.table));
                    let rhs = w.image_of_word(j, &image);
                    let ambient = match (lhs, rhs) {
                        (Ok(l), Ok(r)) => (1..=w.ambient_rank).find(|&g| l.image(g) != r.image(g)),
                        _ => Some(1),
                    };
                    if let Some(ambient) = ambient {
                        failures.push(PresetFailure::Relation { source: (i, p), target: (j, q), ambient });
                    }
                }
            }
        }
    }
    PresetReport { failures }
}

type Letters = Vec<(usize, i64)>;

fn word(rank: usize, letters: &[(usize, i64)]) -> Word {
    free_reduce(letters, rank).expect("generator in range")
}

fn too_small(family: &str, n: usize) -> Error {
    Error::UnsupportedPreset(format!("{family}({n}) needs n >= 2"))
}

fn pair_from_images(rank: usize, table: Vec<Word>, inverse: Vec<Word>) -> ActionPair {
    ActionPair {
        table: EndoTable::new(rank, table).expect("well-formed table"),
        inverse: EndoTable::new(rank, inverse).expect("well-formed table"),
    }
}

/// Artin generator `σ_i` of `B_n` acting on `F_n`, with its inverse.
fn artin_sigma(n: usize, i: usize) -> ActionPair {
    let x = |g: usize| Word::generator(n, g).expect("in range");
    let (mut t, mut t_inv): (Vec<Word>, Vec<Word>) = ((1..=n).map(x).collect(), (1..=n).map(x).collect());
    t[i - 1] = word(n, &[(i, 1), (i + 1, 1), (i, -1)]);
    t[i] = x(i);
    t_inv[i - 1] = x(i + 1);
    t_inv[i] = word(n, &[(i + 1, -1), (i, 1), (i + 1, 1)]);
    pair_from_images(n, t, t_inv)
}

/// The pure braid `A_{ij} = σ_{j-1} ⋯ σ_{i+1} σ_i^2 σ_{i+1}^-1 ⋯ σ_{j-1}^-1`
/// as an automorphism of `F_n`.
fn artin_pure(n: usize, i: usize, j: usize) -> ActionPair {
    let mut letters: Vec<(usize, bool)> = (i + 1..j).rev().map(|k| (k, false)).collect();
    letters.extend([(i, false), (i, false)]);
    letters.extend((i + 1..j).map(|k| (k, true)));
    let mut table = EndoTable::identity(n);
    for &(k, inv) in &letters {
        let s = artin_sigma(n, k);
        table = table.compose(if inv { &s.inverse } else { &s.table }).expect("same rank");
    }
    let mut inverse = EndoTable::identity(n);
    for &(k, inv) in letters.iter().rev() {
        let s = artin_sigma(n, k);
        inverse = inverse.compose(if inv { &s.table } else { &s.inverse }).expect("same rank");
    }
    ActionPair { table, inverse }
}

/// `P_n = F_{n-1} ⋊ ⋯ ⋊ F_1`. Factor `j` is generated by `A_{1,j+1}, …,
/// A_{j,j+1}`; generator `p` of factor `j` is `A_{p,j+1}`. The witness is the
/// Artin representation on `F_n`.
pub fn pure_braid(n: usize) -> Result<PresetBundle> {
    if n < 2 {
        return Err(too_small("pure_braid", n));
    }
    let mut spec = TowerSpec::new((1..n).map(Factor::free).collect())?;
    for big_j in 3..=n {
        let target = big_j - 1;
        let rank = target;
        // generator A_{iJ} of the target factor is x_i
        let x = |g: usize, e: i64| (g, e);
        for s in 2..big_j {
            for r in 1..s {
                let mut table = Vec::with_capacity(rank);
                let mut inverse = Vec::with_capacity(rank);
                for i in 1..=rank {
                    let (a, c) = (r, s);
                    let (img, inv): (Letters, Letters) = if i == s {
                        (vec![x(a, 1), x(i, 1), x(a, -1)], vec![x(c, -1), x(a, -1), x(c, 1), x(a, 1), x(c, 1)])
                    } else if i == r {
                        (
                            vec![x(a, 1), x(c, 1), x(i, 1), x(c, -1), x(a, -1)],
                            vec![x(c, -1), x(a, 1), x(c, 1)],
                        )
                    } else if r < i && i < s {
                        (
                            vec![x(a, 1), x(c, 1), x(a, -1), x(c, -1), x(i, 1), x(c, 1), x(a, 1), x(c, -1), x(a, -1)],
                            vec![x(c, -1), x(a, -1), x(c, 1), x(a, 1), x(i, 1), x(a, -1), x(c, -1), x(a, 1), x(c, 1)],
                        )
                    } else {
                        (vec![x(i, 1)], vec![x(i, 1)])
                    };
                    table.push(word(rank, &img));
                    inverse.push(word(rank, &inv));
                }
                let pair = pair_from_images(rank, table, inverse);
                let key = ActionKey { source_factor: s - 1, source_generator: r, target_factor: target };
                spec.set_action(key, pair.table, pair.inverse)?;
            }
        }
    }
    let mut generators = BTreeMap::new();
    for j in 1..n {
        for p in 1..=j {
            generators.insert((j, p), artin_pure(n, p, j + 1));
        }
    }
    Ok(PresetBundle {
        name: format!("pure_braid:{n}"),
        spec,
        witness: Some(Witness { ambient_rank: n, generators }),
        notes: vec![
            "pure braid group; factor j is the free group on A_{1,j+1}, ..., A_{j,j+1}".into(),
            "actions from the Artin conjugation relations; witness is the Artin representation".into(),
        ],
    })
}


/// `Cb_n^+`, generated by `ε_{kl}: x_k -> x_l^-1 x_k x_l` for `k < l`.
/// Factor `t` holds `ε_{n-t,l}` for `l > n-t`; generator `q` of factor `t`
/// is `ε_{n-t,n-t+q}`. The kernel factor `n-1` holds the `ε_{1,l}`.
pub fn upper_mccool(n: usize) -> Result<PresetBundle> {
    if n < 2 {
        return Err(too_small("upper_mccool", n));
    }
    let mut spec = TowerSpec::new((1..n).map(Factor::free).collect())?;
    for s in 1..n {
        let k = n - s;
        for p in 1..=s {
            let l = k + p;
            for t in s + 1..n {
                let i = n - t;
                let (a, c) = (k - i, l - i);
                let mut table = EndoTable::identity(t).images().to_vec();
                let mut inverse = table.clone();
                table[a - 1] = word(t, &[(c, 1), (a, 1), (c, -1)]);
                inverse[a - 1] = word(t, &[(c, -1), (a, 1), (c, 1)]);
                let pair = pair_from_images(t, table, inverse);
                let key = ActionKey { source_factor: s, source_generator: p, target_factor: t };
                spec.set_action(key, pair.table, pair.inverse)?;
            }
        }
    }
    let mut generators = BTreeMap::new();
    for t in 1..n {
        for q in 1..=t {
            let (k, l) = (n - t, n - t + q);
            let table = EndoTable::elementary_conjugation(n, k, l)?;
            let inverse = EndoTable::conjugate_generator(n, k, &Word::power_of(n, l, -1)?)?;
            generators.insert((t, q), ActionPair { table, inverse });
        }
    }
    Ok(PresetBundle {
        name: format!("upper_mccool:{n}"),
        spec,
        witness: Some(Witness { ambient_rank: n, generators }),
        notes: vec![
            "upper McCool group; generator q of factor t is eps_{n-t,n-t+q}".into(),
            "actions from the McCool relations; witness is the defining action on F_n".into(),
        ],
    })
}

/// `I_n`, generated by the partial inner automorphisms `c_{ki}` conjugating
/// `x_1, …, x_k` by `x_i`. Factor `t` is `H_{t+1} = ⟨c_{t+1,1}, …, c_{t+1,t+1}⟩`.
pub fn partial_inner(n: usize) -> Result<PresetBundle> {
    if n < 2 {
        return Err(too_small("partial_inner", n));
    }
    let mut spec = TowerSpec::new((1..n).map(|t| Factor::free(t + 1)).collect())?;
    for s in 1..n {
        let k = s + 1;
        for i in 1..=k {
            for t in s + 1..n {
                let rank = t + 1;
                let by = Word::generator(rank, i)?;
                let table = EndoTable::partial_inner(rank, k, &by)?;
                let inverse = EndoTable::partial_inner(rank, k, &by.invert())?;
                spec.set_action(ActionKey { source_factor: s, source_generator: i, target_factor: t }, table, inverse)?;
            }
        }
    }
    let mut generators = BTreeMap::new();
    for t in 1..n {
        for p in 1..=t + 1 {
            let by = Word::generator(n, p)?;
            let table = EndoTable::partial_inner(n, t + 1, &by)?;
            let inverse = EndoTable::partial_inner(n, t + 1, &by.invert())?;
            generators.insert((t, p), ActionPair { table, inverse });
        }
    }
    Ok(PresetBundle {
        name: format!("partial_inner:{n}"),
        spec,
        witness: Some(Witness { ambient_rank: n, generators }),
        notes: vec![
            "partial inner automorphism group; generator p of factor t is c_{t+1,p}".into(),
            "witness is the defining action on F_n".into(),
        ],
    })
}

/// Largest shipped parameters for [`pure_monomial`].
pub const PURE_MONOMIAL_MAX: (usize, usize) = (3, 3);

macro_rules! pure_monomial_data {
    ($(($r:literal, $n:literal)),* $(,)?) => {
        fn pure_monomial_data(r: usize, n: usize) -> Option<&'static str> {
            match (r, n) {
                $(($r, $n) => Some(include_str!(concat!("../data/pure_monomial_r", $r, "_n", $n, ".json"))),)*
                _ => None,
            }
        }
    };
}

pure_monomial_data!((1, 1), (1, 2), (1, 3), (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3));

/// `P(r, n)` from the shipped data files (`r <= 3`, `n <= 3`).
pub fn pure_monomial(r: usize, n: usize) -> Result<PresetBundle> {
    let text = pure_monomial_data(r, n).ok_or_else(|| {
        Error::UnsupportedPreset(format!(
            "pure_monomial({r}, {n}): shipped for 1 <= r <= {} and 1 <= n <= {}",
            PURE_MONOMIAL_MAX.0, PURE_MONOMIAL_MAX.1
        ))
    })?;
    crate::format::parse_bundle(text)
}

/// Schreier basis of the kernel `K_j` of `F_j -> Z/r`, `b_1 -> 1`, `b_i -> 0`
/// otherwise, as words of `F_j`: `y_1 = b_1^r` and
/// `y_{1 + k(j-1) + i} = b_1^k b_{i+1} b_1^-k` for `0 <= k < r`, `1 <= i < j`.
fn schreier_basis(r: usize, j: usize) -> Vec<Word> {
    let mut out = vec![word(j, &[(1, r as i64)])];
    for k in 0..r as i64 {
        for i in 1..j {
            out.push(word(j, &[(1, k), (i + 1, 1), (1, -k)]));
        }
    }
    out
}

/// Rewrites a word of `F_j` lying in `K_j` in the Schreier basis.
fn schreier_rewrite(r: usize, j: usize, w: &Word) -> Result<Word> {
    let rank = r * (j - 1) + 1;
    let mut coset = 0usize;
    let mut raw = Vec::new();
    for (g, s) in w.letters() {
        if g == 1 {
            if s > 0 {
                if coset == r - 1 {
                    raw.push((1, 1));
                }
                coset = (coset + 1) % r;
            } else {
                if coset == 0 {
                    raw.push((1, -1));
                }
                coset = (coset + r - 1) % r;
            }
        } else {
            raw.push((1 + coset * (j - 1) + (g - 1), s));
        }
    }
    if coset != 0 {
        return Err(Error::InvalidSpec(format!("{w} is outside the index-{r} kernel")));
    }
    free_reduce(&raw, rank)
}

/// Derives `P(r, n)` as the kernel in `P_{n+1}` of the winding numbers mod
/// `r` of strands `2..=n+1` around strand 1. Factor `j` is `K_j` inside
/// factor `j` of the pure braid tower; actions are computed there and
/// rewritten in Schreier bases. The witness is the Artin representation of
/// the ambient pure braid group.
pub fn derive_pure_monomial(r: usize, n: usize) -> Result<PresetBundle> {
    if r == 0 || n == 0 {
        return Err(Error::UnsupportedPreset(format!("pure_monomial({r}, {n}) needs r, n >= 1")));
    }
    let base = pure_braid(n + 1)?;
    let tower = base.tower()?;
    let bases: Vec<Vec<Word>> = (1..=n).map(|j| schreier_basis(r, j)).collect();
    let mut spec = TowerSpec::new((1..=n).map(|j| Factor::free(r * (j - 1) + 1)).collect())?;
    for s in 1..n {
        for (p, u) in bases[s - 1].iter().enumerate() {
            for t in s + 1..=n {
                let rank = r * (t - 1) + 1;
                let mut table = Vec::with_capacity(rank);
                let mut inverse = Vec::with_capacity(rank);
                for y in &bases[t - 1] {
                    table.push(schreier_rewrite(r, t, &tower.act(s, u, t, y)?)?);
                    inverse.push(schreier_rewrite(r, t, &tower.act_inverse(s, u, t, y)?)?);
                }
                let pair = pair_from_images(rank, table, inverse);
                let key = ActionKey { source_factor: s, source_generator: p + 1, target_factor: t };
                spec.set_action(key, pair.table, pair.inverse)?;
            }
        }
    }
    let artin = base.witness.as_ref().expect("pure braid witness");
    let mut generators = BTreeMap::new();
    for (j, basis) in bases.iter().enumerate() {
        for (p, y) in basis.iter().enumerate() {
            let table = artin.image_of_word(j + 1, y)?;
            let inverse = artin.image_of_word(j + 1, &y.invert())?;
            generators.insert((j + 1, p + 1), ActionPair { table, inverse });
        }
    }
    let mut notes = vec![
        format!("pure monomial braid group P({r},{n}) inside the pure braid group on {} strands", n + 1),
        "factor j: kernel of the winding number mod r of strand j+1 around strand 1".into(),
        "generator 1 of factor j is A_{1,j+1}^r".into(),
    ];
    if n > 1 {
        notes.push("generator 1+k(j-1)+i of factor j is A_{1,j+1}^k A_{i+1,j+1} A_{1,j+1}^-k".into());
    }
    notes.push("witness is the Artin representation of the ambient pure braid group".into());
    Ok(PresetBundle { name: format!("pure_monomial:{r}:{n}"), spec, witness: Some(Witness { ambient_rank: n + 1, generators }), notes })
}

/// Two factors of rank 1 with the action `x -> x^-1`: the Klein bottle group,
/// which is a semidirect product but not an almost-direct one.
pub fn klein_bottle() -> PresetBundle {
    let mut spec = TowerSpec::new(vec![Factor::free(1), Factor::free(1)]).expect("nonempty");
    let flip = EndoTable::new(1, vec![Word::power_of(1, 1, -1).expect("in range")]).expect("rank 1");
    spec.set_action(ActionKey { source_factor: 1, source_generator: 1, target_factor: 2 }, flip.clone(), flip)
        .expect("valid indices");
    PresetBundle {
        name: "klein_bottle".into(),
        spec,
        witness: None,
        notes: vec!["not almost-direct: the action inverts the kernel's abelianization".into()],
    }
}

pub const PRESET_NAMES: &[&str] =
    &["pure_braid:<n>", "upper_mccool:<n>", "partial_inner:<n>", "pure_monomial:<r>:<n>", "klein_bottle"];

/// Looks up a preset by name, e.g. `pure_braid:3` or `pure_monomial:2:2`.
pub fn by_name(name: &str) -> Result<PresetBundle> {
    let mut parts = name.split(':');
    let family = parts.next().unwrap_or_default();
    let args = parts
        .map(|p| p.parse::<usize>().map_err(|_| Error::UnsupportedPreset(format!("{name}: bad parameter {p:?}"))))
        .collect::<Result<Vec<_>>>()?;
    match (family, args.as_slice()) {
        ("pure_braid", [n]) => pure_braid(*n),
        ("upper_mccool", [n]) => upper_mccool(*n),
        ("partial_inner", [n]) => partial_inner(*n),
        ("pure_monomial", [r, n]) => pure_monomial(*r, *n),
        ("klein_bottle", []) => Ok(klein_bottle()),
        _ => Err(Error::UnsupportedPreset(format!("{name}; known presets: {}", PRESET_NAMES.join(", ")))),
    }
}
