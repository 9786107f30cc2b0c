//! JSON tower-spec files.
//!
//! ```json
//! {
//!   "name": "example",
//!   "factors": [{ "rank": 1, "kind": "free" }, { "rank": 2, "kind": "free" }],
//!   "actions": [{
//!     "source_factor": 1, "source_generator": 1, "target_factor": 2,
//!     "table": ["x2^-1 x1 x2", "x2"],
//!     "inverse_table": ["x2 x1 x2^-1", "x2"]
//!   }]
//! }
//! ```
//!
//! `kind` is `free` (the default) or `reduced`. Omitted actions are identity
//! tables. Images are words in the target factor, one per generator. An
//! optional `witness` section gives an ambient rank and, for each tower
//! generator, an automorphism table with its inverse. The JSON Schema is
//! `schema/tower-spec.schema.json`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::automorphism::EndoTable;
use crate::error::{Error, Result};
use crate::parse::parse_word;
use crate::presets::{PresetBundle, Witness};
use crate::tower::{ActionKey, ActionPair, Factor, FactorKind, TowerSpec};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
    factors: Vec<FactorEntry>,
    #[serde(default)]
    actions: Vec<ActionEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    witness: Option<WitnessEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FactorEntry {
    rank: usize,
    #[serde(default = "free_kind")]
    kind: FactorKind,
}

fn free_kind() -> FactorKind {
    FactorKind::Free
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActionEntry {
    source_factor: usize,
    source_generator: usize,
    target_factor: usize,
    table: Vec<String>,
    inverse_table: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessEntry {
    ambient_rank: usize,
    generators: Vec<WitnessGenerator>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WitnessGenerator {
    factor: usize,
    generator: usize,
    table: Vec<String>,
    inverse_table: Vec<String>,
}

fn entry_error(path: String) -> impl Fn(Error) -> Error {
    move |e| Error::SpecEntry { path: path.clone(), message: e.to_string() }
}

fn read_table(images: &[String], rank: usize, path: &str) -> Result<EndoTable> {
    if images.len() != rank {
        return Err(Error::SpecEntry {
            path: path.to_string(),
            message: format!("expected {rank} images, found {}", images.len()),
        });
    }
    let words = images
        .iter()
        .enumerate()
        .map(|(k, s)| parse_word(s, Some(rank)).map_err(entry_error(format!("{path}[{k}]"))))
        .collect::<Result<Vec<_>>>()?;
    EndoTable::new(rank, words).map_err(entry_error(path.to_string()))
}

fn write_table(t: &EndoTable) -> Vec<String> {
    t.images().iter().map(|w| w.to_string()).collect()
}

/// Parses a spec file. The result is not validated; see [`TowerSpec::validate`].
pub fn parse_bundle(text: &str) -> Result<PresetBundle> {
    let file: SpecFile = serde_json::from_str(text)
        .map_err(|e| Error::SpecFile { line: e.line(), column: e.column(), message: e.to_string() })?;
    let factors = file
        .factors
        .iter()
        .enumerate()
        .map(|(k, f)| {
            if f.rank == 0 {
                Err(Error::SpecEntry { path: format!("factors[{k}].rank"), message: "rank must be positive".into() })
            } else {
                Ok(Factor { rank: f.rank, kind: f.kind })
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mut spec = TowerSpec::new(factors).map_err(entry_error("factors".into()))?;
    for (k, a) in file.actions.iter().enumerate() {
        let path = format!("actions[{k}]");
        let key = ActionKey {
            source_factor: a.source_factor,
            source_generator: a.source_generator,
            target_factor: a.target_factor,
        };
        if key.target_factor == 0 || key.target_factor > spec.len() {
            return Err(Error::SpecEntry { path: format!("{path}.target_factor"), message: "no such factor".into() });
        }
        if spec.action(&key).is_some() {
            return Err(Error::SpecEntry { path, message: format!("duplicate action {key}") });
        }
        let rank = spec.factor(key.target_factor).rank;
        let table = read_table(&a.table, rank, &format!("{path}.table"))?;
        let inverse = read_table(&a.inverse_table, rank, &format!("{path}.inverse_table"))?;
        spec.set_action(key, table, inverse).map_err(entry_error(path))?;
    }
    let witness = match file.witness {
        None => None,
        Some(w) => {
            if w.ambient_rank == 0 {
                return Err(Error::SpecEntry { path: "witness.ambient_rank".into(), message: "rank must be positive".into() });
            }
            let mut generators = BTreeMap::new();
            for (k, g) in w.generators.iter().enumerate() {
                let path = format!("witness.generators[{k}]");
                let table = read_table(&g.table, w.ambient_rank, &format!("{path}.table"))?;
                let inverse = read_table(&g.inverse_table, w.ambient_rank, &format!("{path}.inverse_table"))?;
                if generators.insert((g.factor, g.generator), ActionPair { table, inverse }).is_some() {
                    return Err(Error::SpecEntry {
                        path,
                        message: format!("duplicate witness for g{}.{}", g.factor, g.generator),
                    });
                }
            }
            Some(Witness { ambient_rank: w.ambient_rank, generators })
        }
    };
    Ok(PresetBundle { name: file.name.unwrap_or_default(), spec, witness, notes: file.notes })
}

pub fn parse_spec(text: &str) -> Result<TowerSpec> {
    parse_bundle(text).map(|b| b.spec)
}

pub fn load_bundle(path: &Path) -> Result<PresetBundle> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::SpecEntry {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_bundle(&text)
}

/// Pretty-printed JSON; actions in key order, identity actions omitted.
pub fn bundle_to_json(b: &PresetBundle) -> String {
    let file = SpecFile {
        name: (!b.name.is_empty()).then(|| b.name.clone()),
        notes: b.notes.clone(),
        factors: b.spec.factors().iter().map(|f| FactorEntry { rank: f.rank, kind: f.kind }).collect(),
        actions: b
            .spec
            .actions()
            .map(|(k, a)| ActionEntry {
                source_factor: k.source_factor,
                source_generator: k.source_generator,
                target_factor: k.target_factor,
                table: write_table(&a.table),
                inverse_table: write_table(&a.inverse),
            })
            .collect(),
        witness: b.witness.as_ref().map(|w| WitnessEntry {
            ambient_rank: w.ambient_rank,
            generators: w
                .generators
                .iter()
                .map(|(&(factor, generator), a)| WitnessGenerator {
                    factor,
                    generator,
                    table: write_table(&a.table),
                    inverse_table: write_table(&a.inverse),
                })
                .collect(),
        }),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("serializable");
    out.push('\n');
    out
}
