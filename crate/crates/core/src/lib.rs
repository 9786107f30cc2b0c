//! Orderings of free groups, reduced free groups and towers of semidirect
//! products built from them, decided through Magnus expansions.

pub mod automorphism;
pub mod error;
pub mod format;
pub mod magnus;
pub mod monomial;
pub mod parse;
pub mod presets;
pub mod reduced;
pub mod suites;
pub mod tower;
pub mod word;

pub use automorphism::{verify_inverse_pair, EndoTable};
pub use error::{Error, Result};
pub use magnus::{
    geometric_inverse, magnus_compare, magnus_expand, series_add, series_compare, series_mul, sign, Decision,
    ExpansionCache, MagnusOrder, MagnusSeries, SeriesVerdict, Sign, DEFAULT_MAX_DEGREE,
};
pub use monomial::Monomial;
pub use parse::{parse_word, Symbol};
pub use reduced::{reduced_compare, reduced_equal, reduced_expand, ReducedOrder, SquareFreePoly, DEFAULT_MAX_REDUCED_RANK};
pub use tower::{
    ActionKey, ActionPair, Factor, FactorKind, Tower, TowerAb, TowerDecision, TowerElement, TowerSpec,
    ValidationReport, Violation,
};
pub use word::{free_reduce, AbVector, Word};
