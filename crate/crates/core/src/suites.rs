//! Seeded property suites for the order on a tower.
//!
//! Case `k` draws from its own ChaCha8 stream (seed, stream `k`), so a run is
//! reproducible regardless of thread count. Cases run in parallel and are
//! collected in index order; the first failing case is shrunk greedily by
//! deleting letters from its inputs while the property still fails.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::automorphism::EndoTable;
use crate::error::{Error, Result};
use crate::tower::{FactorKind, Tower, TowerElement};
use crate::word::{reduced_words_up_to, Word};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    OrderAxioms,
    BiInvariance,
    IaInvariance,
    PositiveCone,
    GenTorsion,
    AbRespecting,
    Diagram,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::OrderAxioms,
        Suite::BiInvariance,
        Suite::IaInvariance,
        Suite::PositiveCone,
        Suite::GenTorsion,
        Suite::AbRespecting,
        Suite::Diagram,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::OrderAxioms => "order-axioms",
            Suite::BiInvariance => "bi-invariance",
            Suite::IaInvariance => "ia-invariance",
            Suite::PositiveCone => "positive-cone",
            Suite::GenTorsion => "gen-torsion",
            Suite::AbRespecting => "ab-respecting",
            Suite::Diagram => "diagram",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Suite::ALL.into_iter().find(|x| x.name() == s).ok_or_else(|| {
            let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
            format!("unknown suite {s:?}; expected one of {}", names.join(", "))
        })
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub iterations: usize,
    /// Letter-length bound for random tower words.
    pub max_len: usize,
    /// For `order-axioms` on a single-factor tower: check every reduced word
    /// up to this length instead of sampling.
    pub exhaustive: Option<usize>,
    /// Upper bound on the number of conjugates in `gen-torsion`.
    pub max_conjugates: usize,
    /// Upper bound on the number of elementary factors of a random IA table.
    pub max_ia_factors: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { seed: 0, iterations: 1000, max_len: 6, exhaustive: None, max_conjugates: 5, max_ia_factors: 4 }
    }
}

/// A comparison whose verdict contradicts the property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub case: usize,
    pub message: String,
    /// Inputs of the case after shrinking.
    pub inputs: Vec<TowerElement>,
    /// `left` compared with `right` should give `expected`.
    pub left: TowerElement,
    pub right: TowerElement,
    pub expected: Ordering,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: usize,
    pub cases: usize,
    /// Exhaustive runs record the word count instead of sampled cases.
    pub exhaustive_words: Option<usize>,
    pub counterexample: Option<Counterexample>,
}

impl SuiteReport {
    pub fn is_pass(&self) -> bool {
        self.counterexample.is_none()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.is_pass() { "PASS" } else { "FAIL" };
        match self.exhaustive_words {
            Some(words) => write!(f, "{verdict} exhaustive {words} words"),
            None => write!(f, "{verdict} {}/{}", self.passed, self.cases),
        }
    }
}

/// A property violation found inside one case.
struct Breach {
    message: String,
    left: TowerElement,
    right: TowerElement,
    expected: Ordering,
}

type CaseResult = Result<Option<Breach>>;

type IaOutcome = Result<Option<(usize, EndoTable, Vec<TowerElement>)>>;

pub fn render(tower: &Tower, g: &TowerElement) -> String {
    if tower.len() == 1 {
        g.component(1).to_string()
    } else {
        g.to_string()
    }
}

fn rng_for(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

/// Random element: up to `max_len` uniform signed tower generators, normalized.
pub fn random_element(tower: &Tower, rng: &mut impl Rng, max_len: usize) -> Result<TowerElement> {
    let gens: Vec<(usize, usize)> =
        (1..=tower.len()).flat_map(|i| (1..=tower.factor(i).rank).map(move |p| (i, p))).collect();
    let len = rng.gen_range(0..=max_len);
    let letters: Vec<_> = (0..len)
        .map(|_| {
            let (i, p) = gens[rng.gen_range(0..gens.len())];
            (i, p, if rng.gen_bool(0.5) { 1 } else { -1 })
        })
        .collect();
    tower.normalize(&letters)
}

/// Random nontrivial element; gives up after a bounded number of draws.
pub fn random_nontrivial(tower: &Tower, rng: &mut impl Rng, max_len: usize) -> Result<TowerElement> {
    let one = tower.identity();
    for _ in 0..64 {
        let g = random_element(tower, rng, max_len.max(1))?;
        if !tower.equal(&g, &one)? {
            return Ok(g);
        }
    }
    tower.normalize(&[(1, 1, 1)])
}

/// A product of up to `max_factors` random `ε_{ij}^{±1}`.
pub fn random_ia_table(rank: usize, rng: &mut impl Rng, max_factors: usize) -> Result<EndoTable> {
    let mut t = EndoTable::identity(rank);
    if rank < 2 {
        return Ok(t);
    }
    for _ in 0..rng.gen_range(1..=max_factors.max(1)) {
        let i = rng.gen_range(1..=rank);
        let mut j = rng.gen_range(1..rank);
        if j >= i {
            j += 1;
        }
        let by = Word::power_of(rank, j, if rng.gen_bool(0.5) { 1 } else { -1 })?;
        t = t.compose(&EndoTable::conjugate_generator(rank, i, &by)?)?;
    }
    Ok(t)
}

fn breach(message: impl Into<String>, left: TowerElement, right: TowerElement, expected: Ordering) -> CaseResult {
    Ok(Some(Breach { message: message.into(), left, right, expected }))
}

/// Flips `g` into the positive cone; `None` for the identity.
fn make_positive(t: &Tower, g: &TowerElement) -> Result<Option<TowerElement>> {
    match t.compare(&t.identity(), g)? {
        Ordering::Less => Ok(Some(g.clone())),
        Ordering::Greater => Ok(Some(t.invert(g)?)),
        Ordering::Equal => Ok(None),
    }
}

fn check_free_equality(t: &Tower, g: &TowerElement, h: &TowerElement, o: Ordering) -> CaseResult {
    let all_free = t.spec().factors().iter().all(|f| f.kind == FactorKind::Free);
    if all_free && (o == Ordering::Equal) != (g == h) {
        let expected = if g == h { Ordering::Equal } else { o.reverse() };
        return breach("verdict EQUAL does not match equality of normal forms", g.clone(), h.clone(), expected);
    }
    Ok(None)
}

fn order_axioms(t: &Tower, xs: &[TowerElement]) -> CaseResult {
    let (g, h, k) = (&xs[0], &xs[1], &xs[2]);
    for (a, b) in [(g, h), (h, k), (g, k)] {
        let o = t.compare(a, b)?;
        if t.compare(b, a)? != o.reverse() {
            return breach("compare is not antisymmetric", b.clone(), a.clone(), o.reverse());
        }
        if let Some(b) = check_free_equality(t, a, b, o)? {
            return Ok(Some(b));
        }
    }
    let (gh, hk) = (t.compare(g, h)?, t.compare(h, k)?);
    if gh == hk && gh != Ordering::Equal && t.compare(g, k)? != gh {
        return breach("compare is not transitive", g.clone(), k.clone(), gh);
    }
    Ok(None)
}

fn bi_invariance(t: &Tower, xs: &[TowerElement]) -> CaseResult {
    let (g, h, a, b) = (&xs[0], &xs[1], &xs[2], &xs[3]);
    let o = t.compare(g, h)?;
    let agb = t.multiply(&t.multiply(a, g)?, b)?;
    let ahb = t.multiply(&t.multiply(a, h)?, b)?;
    if t.compare(&agb, &ahb)? != o {
        return breach("a g b and a h b are not ordered like g and h", agb, ahb, o);
    }
    Ok(None)
}

fn ia_invariance(t: &Tower, table: &EndoTable, xs: &[TowerElement]) -> CaseResult {
    let (g, h) = (&xs[0], &xs[1]);
    let o = t.compare(g, h)?;
    let fg = t.embed(1, &table.apply(g.component(1))?)?;
    let fh = t.embed(1, &table.apply(h.component(1))?)?;
    if t.compare(&fg, &fh)? != o {
        return breach("the IA image of the pair is ordered differently", fg, fh, o);
    }
    Ok(None)
}

fn positive_cone(t: &Tower, xs: &[TowerElement]) -> CaseResult {
    let (Some(g), Some(h)) = (make_positive(t, &xs[0])?, make_positive(t, &xs[1])?) else { return Ok(None) };
    let a = &xs[2];
    let one = t.identity();
    let gh = t.multiply(&g, &h)?;
    if t.compare(&one, &gh)? != Ordering::Less {
        return breach("product of positive elements is not positive", one, gh, Ordering::Less);
    }
    let conj = t.conjugate(&g, a)?;
    if t.compare(&one, &conj)? != Ordering::Less {
        return breach("conjugate of a positive element is not positive", one, conj, Ordering::Less);
    }
    Ok(None)
}

/// Normal forms of products of conjugates can grow exponentially in the upper
/// factors, so verdicts are settled in the shortest prefix tower that decides
/// them. A positive `g` is decided at some factor `k`; its conjugates and
/// their products are trivial below `k`, so nothing above `k` is needed.
fn gen_torsion(t: &Tower, prefixes: &[Tower], xs: &[TowerElement]) -> CaseResult {
    let Some(g) = make_positive(t, &xs[0])? else { return Ok(None) };
    let hs = &xs[1..];
    let mut open = vec![true; hs.len()];
    let mut product_open = true;
    for (k, tk) in (1..).zip(prefixes) {
        let gk = t.truncate(&g, k)?;
        let one = tk.identity();
        let mut product = one.clone();
        for (j, h) in hs.iter().enumerate() {
            let c = tk.conjugate(&gk, &t.truncate(h, k)?)?;
            if open[j] {
                match tk.compare(&one, &c)? {
                    Ordering::Less => open[j] = false,
                    Ordering::Equal if k < t.len() => {}
                    _ => {
                        let c = t.conjugate(&g, h)?;
                        return breach("conjugate of a positive element is not positive", t.identity(), c, Ordering::Less);
                    }
                }
            }
            if product_open {
                product = tk.multiply(&product, &c)?;
            }
        }
        if product_open {
            match tk.compare(&one, &product)? {
                Ordering::Less => product_open = false,
                Ordering::Equal if k < t.len() => {}
                _ => {
                    let mut full = t.identity();
                    for h in hs {
                        full = t.multiply(&full, &t.conjugate(&g, h)?)?;
                    }
                    return breach(
                        "product of conjugates of a positive element is not positive",
                        t.identity(),
                        full,
                        Ordering::Less,
                    );
                }
            }
        }
        if !product_open && !open.contains(&true) {
            break;
        }
    }
    Ok(None)
}

fn ab_respecting(t: &Tower, xs: &[TowerElement]) -> CaseResult {
    let (g, h) = (&xs[0], &xs[1]);
    let o = t.compare(g, h)?;
    let ab_order = t.ab(g).cmp_lex(&t.ab(h));
    if ab_order != Ordering::Equal && ab_order != o {
        return breach("abelianizations are ordered the other way", g.clone(), h.clone(), ab_order);
    }
    Ok(None)
}

fn diagram(t: &Tower, quotient: &Tower, xs: &[TowerElement]) -> CaseResult {
    let (g, h) = (&xs[0], &xs[1]);
    let rg = t.retraction(g)?;
    if quotient.ab(&rg) != t.ab(g).drop_last() {
        return breach("ab after retraction differs from ab with the last block dropped", g.clone(), g.clone(), Ordering::Equal);
    }
    let lhs = t.retraction(&t.multiply(g, h)?)?;
    let rhs = quotient.multiply(&rg, &t.retraction(h)?)?;
    if lhs != rhs {
        let lift = |x: &TowerElement| {
            let mut comps = x.components().to_vec();
            comps.push(Word::identity(t.factor(t.len()).rank));
            t.element(comps)
        };
        return breach("retraction is not multiplicative", lift(&lhs)?, lift(&rhs)?, Ordering::Equal);
    }
    Ok(None)
}

/// Deletes single letters from the inputs while the property keeps failing.
fn shrink<F>(t: &Tower, mut inputs: Vec<TowerElement>, property: &F) -> Result<(Vec<TowerElement>, Breach)>
where
    F: Fn(&[TowerElement]) -> CaseResult,
{
    let mut current = property(&inputs)?.expect("shrinking starts from a failure");
    'outer: loop {
        for k in 0..inputs.len() {
            let letters = inputs[k].letters();
            for drop in 0..letters.len() {
                let mut shorter = letters.clone();
                if shorter[drop].2.abs() > 1 {
                    shorter[drop].2 -= shorter[drop].2.signum();
                } else {
                    shorter.remove(drop);
                }
                let mut candidate = inputs.clone();
                candidate[k] = t.normalize(&shorter)?;
                if let Some(b) = property(&candidate)? {
                    inputs = candidate;
                    current = b;
                    continue 'outer;
                }
            }
        }
        return Ok((inputs, current));
    }
}

fn run_sampled<G, F>(t: &Tower, suite: Suite, cfg: &SuiteConfig, generate: G, property: F) -> Result<SuiteReport>
where
    G: Fn(&mut ChaCha8Rng) -> Result<Vec<TowerElement>> + Sync,
    F: Fn(&[TowerElement]) -> CaseResult + Sync,
{
    let outcomes: Vec<Result<Option<Vec<TowerElement>>>> = (0..cfg.iterations)
        .into_par_iter()
        .map(|case| {
            let mut rng = rng_for(cfg.seed, case);
            let inputs = generate(&mut rng)?;
            Ok(property(&inputs)?.map(|_| inputs))
        })
        .collect();
    let mut passed = 0;
    for (case, outcome) in outcomes.into_iter().enumerate() {
        match outcome? {
            None => passed += 1,
            Some(inputs) => {
                let (inputs, b) = shrink(t, inputs, &property)?;
                return Ok(SuiteReport {
                    suite,
                    passed,
                    cases: cfg.iterations,
                    exhaustive_words: None,
                    counterexample: Some(Counterexample {
                        case,
                        message: b.message,
                        inputs,
                        left: b.left,
                        right: b.right,
                        expected: b.expected,
                    }),
                });
            }
        }
    }
    Ok(SuiteReport { suite, passed, cases: cfg.iterations, exhaustive_words: None, counterexample: None })
}

/// Every pair and triple of reduced words up to `max_len` in a single factor.
#[allow(clippy::needless_range_loop)]
fn exhaustive_order_axioms(t: &Tower, max_len: usize) -> Result<SuiteReport> {
    let words = reduced_words_up_to(t.factor(1).rank, max_len);
    let elems: Vec<TowerElement> = words.iter().map(|w| t.embed(1, w)).collect::<Result<_>>()?;
    let n = elems.len();
    let rows: Vec<Vec<Ordering>> = (0..n)
        .into_par_iter()
        .map(|a| (0..n).map(|b| t.compare(&elems[a], &elems[b])).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let fail = |message: &str, a: usize, b: usize, expected: Ordering| SuiteReport {
        suite: Suite::OrderAxioms,
        passed: 0,
        cases: 0,
        exhaustive_words: Some(n),
        counterexample: Some(Counterexample {
            case: a * n + b,
            message: message.to_string(),
            inputs: vec![elems[a].clone(), elems[b].clone()],
            left: elems[a].clone(),
            right: elems[b].clone(),
            expected,
        }),
    };
    let free = t.factor(1).kind == FactorKind::Free;
    for a in 0..n {
        for b in 0..n {
            if rows[a][b] != rows[b][a].reverse() {
                return Ok(fail("compare is not antisymmetric", a, b, rows[b][a].reverse()));
            }
            if free && (rows[a][b] == Ordering::Equal) != (a == b) {
                let expected = if a == b { Ordering::Equal } else { rows[b][a].reverse() };
                return Ok(fail("verdict EQUAL does not match equality of words", a, b, expected));
            }
        }
    }
    let bad = (0..n).into_par_iter().find_map_first(|a| {
        for b in 0..n {
            if rows[a][b] != Ordering::Less {
                continue;
            }
            for c in 0..n {
                if rows[b][c] == Ordering::Less && rows[a][c] != Ordering::Less {
                    return Some((a, c));
                }
            }
        }
        None
    });
    if let Some((a, c)) = bad {
        return Ok(fail("compare is not transitive", a, c, Ordering::Less));
    }
    Ok(SuiteReport { suite: Suite::OrderAxioms, passed: n * n, cases: n * n, exhaustive_words: Some(n), counterexample: None })
}

pub fn run_suite(suite: Suite, tower: &Tower, cfg: &SuiteConfig) -> Result<SuiteReport> {
    let t = tower;
    let len = cfg.max_len;
    let draw = |n: usize| move |rng: &mut ChaCha8Rng| (0..n).map(|_| random_element(t, rng, len)).collect();
    match suite {
        Suite::OrderAxioms => match cfg.exhaustive {
            Some(max_len) if t.len() == 1 => exhaustive_order_axioms(t, max_len),
            _ => run_sampled(t, suite, cfg, draw(3), |xs: &[TowerElement]| order_axioms(t, xs)),
        },
        Suite::BiInvariance => run_sampled(t, suite, cfg, draw(4), |xs: &[TowerElement]| bi_invariance(t, xs)),
        Suite::IaInvariance => {
            if t.len() != 1 {
                return Err(Error::SpecMismatch("ia-invariance runs on a single free or reduced free factor".into()));
            }
            // one table per case, drawn from the case's own stream
            let rank = t.factor(1).rank;
            let outcomes: Vec<IaOutcome> = (0..cfg.iterations)
                .into_par_iter()
                .map(|case| {
                    let mut rng = rng_for(cfg.seed, case);
                    let table = random_ia_table(rank, &mut rng, cfg.max_ia_factors)?;
                    let xs = vec![random_element(t, &mut rng, len)?, random_element(t, &mut rng, len)?];
                    Ok(ia_invariance(t, &table, &xs)?.map(|_| (case, table, xs)))
                })
                .collect();
            let mut passed = 0;
            for outcome in outcomes {
                match outcome? {
                    None => passed += 1,
                    Some((case, table, xs)) => {
                        let property = |ys: &[TowerElement]| ia_invariance(t, &table, ys);
                        let (inputs, b) = shrink(t, xs, &property)?;
                        return Ok(SuiteReport {
                            suite,
                            passed,
                            cases: cfg.iterations,
                            exhaustive_words: None,
                            counterexample: Some(Counterexample {
                                case,
                                message: format!("{} (table: {})", b.message, table.to_string().replace('\n', "; ")),
                                inputs,
                                left: b.left,
                                right: b.right,
                                expected: b.expected,
                            }),
                        });
                    }
                }
            }
            Ok(SuiteReport { suite, passed, cases: cfg.iterations, exhaustive_words: None, counterexample: None })
        }
        Suite::PositiveCone => run_sampled(t, suite, cfg, draw(3), |xs: &[TowerElement]| positive_cone(t, xs)),
        Suite::GenTorsion => {
            let k_max = cfg.max_conjugates.max(1);
            let generate = |rng: &mut ChaCha8Rng| {
                let g = random_nontrivial(t, rng, len)?;
                let k = rng.gen_range(1..=k_max);
                let mut xs = vec![g];
                for _ in 0..k {
                    xs.push(random_element(t, rng, len)?);
                }
                Ok(xs)
            };
            let prefixes = (1..=t.len()).map(|k| t.prefix(k)).collect::<Result<Vec<_>>>()?;
            run_sampled(t, suite, cfg, generate, |xs: &[TowerElement]| gen_torsion(t, &prefixes, xs))
        }
        Suite::AbRespecting => run_sampled(t, suite, cfg, draw(2), |xs: &[TowerElement]| ab_respecting(t, xs)),
        Suite::Diagram => {
            let quotient = t.retract_tower()?;
            run_sampled(t, suite, cfg, draw(2), |xs: &[TowerElement]| diagram(t, &quotient, xs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::tower::Factor;

    fn free(rank: usize) -> Tower {
        Tower::single(Factor::free(rank)).unwrap()
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn exhaustive_order_axioms_rank_two() {
        let cfg = SuiteConfig { exhaustive: Some(3), ..SuiteConfig::default() };
        let r = run_suite(Suite::OrderAxioms, &free(2), &cfg).unwrap();
        assert!(r.is_pass());
        assert_eq!(r.exhaustive_words, Some(53));
        assert_eq!(r.to_string(), "PASS exhaustive 53 words");
    }

    #[test]
    fn runs_are_deterministic() {
        let t = presets::pure_braid(3).unwrap().tower().unwrap();
        let cfg = SuiteConfig { seed: 11, iterations: 50, ..SuiteConfig::default() };
        let mut rng_a = rng_for(11, 3);
        let mut rng_b = rng_for(11, 3);
        assert_eq!(random_element(&t, &mut rng_a, 6).unwrap(), random_element(&t, &mut rng_b, 6).unwrap());
        for s in [Suite::BiInvariance, Suite::PositiveCone, Suite::GenTorsion, Suite::AbRespecting, Suite::Diagram] {
            let a = run_suite(s, &t, &cfg).unwrap();
            assert!(a.is_pass(), "{s}: {a:?}");
            assert_eq!(a, run_suite(s, &t, &cfg).unwrap());
        }
    }

    #[test]
    fn ia_invariance_needs_one_factor() {
        let t = presets::pure_braid(3).unwrap().tower().unwrap();
        assert!(run_suite(Suite::IaInvariance, &t, &SuiteConfig::default()).is_err());
        let cfg = SuiteConfig { iterations: 100, ..SuiteConfig::default() };
        assert!(run_suite(Suite::IaInvariance, &free(3), &cfg).unwrap().is_pass());
        assert!(run_suite(Suite::IaInvariance, &Tower::single(Factor::reduced(3)).unwrap(), &cfg).unwrap().is_pass());
        assert!(matches!(run_suite(Suite::Diagram, &free(2), &cfg), Err(Error::NoRetraction)));
    }

    /// An order that is not bi-invariant must be caught and shrunk.
    #[test]
    fn broken_property_is_caught_and_shrunk() {
        let t = free(2);
        let cfg = SuiteConfig { seed: 3, iterations: 200, ..SuiteConfig::default() };
        let property = |xs: &[TowerElement]| -> CaseResult {
            // claims every nonidentity element is shorter than its square
            let g = &xs[0];
            let g2 = t.multiply(g, g)?;
            if !g.is_identity() && g.len() > 1 {
                return breach("length too large", g.clone(), g2, Ordering::Less);
            }
            Ok(None)
        };
        let draw = |rng: &mut ChaCha8Rng| Ok(vec![random_element(&t, rng, 6)?]);
        let r = run_sampled(&t, Suite::BiInvariance, &cfg, draw, property).unwrap();
        let c = r.counterexample.unwrap();
        assert_eq!(c.inputs[0].len(), 2);
    }
}
