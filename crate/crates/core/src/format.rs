//! Network interchange format.
//!
//! One JSON document per network:
//!
//! ```text
//! {
//!   "format": "bayesqa-network/1",
//!   "name": "gallstone",
//!   "source": "medical",
//!   "variables": [
//!     { "id": "gallstones", "name": "gallstones", "states": ["yes", "no"] }
//!   ],
//!   "cpts": [
//!     { "variable": "gallstones", "parents": [],
//!       "rows": [ { "given": [], "probabilities": [0.1531, 0.8469] } ] }
//!   ]
//! }
//! ```
//!
//! `given` lists parent states in the order of `parents`. Saving writes
//! variables and CPTs in topological order (ties by id) and rows in
//! parent-product order, with probabilities printed as shortest round-trip
//! decimals, so equal networks serialize to equal bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::model::{BayesianNetwork, Cpt, CptRow, ModelError, RandomVariable};

pub const FORMAT_TAG: &str = "bayesqa-network/1";

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    /// Rescale CPT rows to sum to one before validation.
    pub renormalize: bool,
}

#[derive(Serialize, Deserialize)]
struct RawNetwork {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    format: Option<String>,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    variables: Vec<RawVariable>,
    cpts: Vec<RawCpt>,
}

#[derive(Serialize, Deserialize)]
struct RawVariable {
    id: String,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    states: Option<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct RawCpt {
    variable: String,
    #[serde(default)]
    parents: Vec<String>,
    rows: Vec<RawRow>,
}

#[derive(Serialize, Deserialize)]
struct RawRow {
    #[serde(default)]
    given: Vec<String>,
    probabilities: Vec<f64>,
}

/// Line and column (1-based) of the first occurrence of `needle`.
fn locate(text: &str, needle: &str) -> (usize, usize) {
    match text.find(needle) {
        Some(offset) => {
            let before = &text[..offset];
            let line = before.matches('\n').count() + 1;
            let column = offset - before.rfind('\n').map(|i| i + 1).unwrap_or(0) + 1;
            (line, column)
        }
        None => (0, 0),
    }
}

/// Parses a network document without validating it.
pub fn from_str_unchecked(text: &str) -> Result<BayesianNetwork, ModelError> {
    let raw: RawNetwork = serde_json::from_str(text).map_err(|e| ModelError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    if let Some(tag) = &raw.format {
        if tag != FORMAT_TAG {
            let (line, column) = locate(text, tag);
            return Err(ModelError::Parse {
                line,
                column,
                message: format!("unsupported format tag `{tag}`, expected `{FORMAT_TAG}`"),
            });
        }
    }
    let mut variables = Vec::with_capacity(raw.variables.len());
    for var in raw.variables {
        let Some(states) = var.states else {
            let (line, column) = locate(text, &format!("\"{}\"", var.id));
            return Err(ModelError::Parse {
                line,
                column,
                message: format!("variable `{}` has no `states` list", var.id),
            });
        };
        variables.push(RandomVariable {
            name: var.name.unwrap_or_else(|| var.id.clone()),
            id: var.id,
            states,
        });
    }
    let cpts = raw
        .cpts
        .into_iter()
        .map(|c| Cpt {
            variable: c.variable,
            parents: c.parents,
            rows: c
                .rows
                .into_iter()
                .map(|r| CptRow {
                    given: r.given,
                    distribution: r.probabilities,
                })
                .collect(),
        })
        .collect();
    Ok(BayesianNetwork {
        name: raw.name,
        source: raw.source,
        variables,
        cpts,
    })
}

pub fn from_str(text: &str, options: LoadOptions) -> Result<BayesianNetwork, ModelError> {
    let mut net = from_str_unchecked(text)?;
    if options.renormalize {
        net = net.renormalized();
    }
    net.ensure_valid()?;
    Ok(net)
}

/// Canonical text of a valid network.
pub fn to_string(network: &BayesianNetwork) -> Result<String, ModelError> {
    network.ensure_valid()?;
    let canonical = network.canonical()?;
    let raw = RawNetwork {
        format: Some(FORMAT_TAG.to_string()),
        name: canonical.name,
        source: canonical.source,
        variables: canonical
            .variables
            .into_iter()
            .map(|v| RawVariable {
                id: v.id,
                name: Some(v.name),
                states: Some(v.states),
            })
            .collect(),
        cpts: canonical
            .cpts
            .into_iter()
            .map(|c| RawCpt {
                variable: c.variable,
                parents: c.parents,
                rows: c
                    .rows
                    .into_iter()
                    .map(|r| RawRow {
                        given: r.given,
                        probabilities: r.distribution,
                    })
                    .collect(),
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&raw).expect("network serializes");
    text.push('\n');
    Ok(text)
}

pub fn load(path: impl AsRef<Path>) -> Result<BayesianNetwork, ModelError> {
    load_with(path, LoadOptions::default())
}

pub fn load_with(path: impl AsRef<Path>, options: LoadOptions) -> Result<BayesianNetwork, ModelError> {
    let text = fs::read_to_string(path)?;
    from_str(&text, options)
}

pub fn save(network: &BayesianNetwork, path: impl AsRef<Path>) -> Result<(), ModelError> {
    fs::write(path, to_string(network)?)?;
    Ok(())
}
