//! Template sentences for CPT rows.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::model::{topological_order, BayesianNetwork, RandomVariable};
use crate::wep::{verbalize_distribution, Verbalization, EQUALLY_LIKELY};

use super::DatasetError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PremiseKind {
    Numeric,
    Wep,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub variable: String,
    pub state: String,
}

impl Binding {
    pub fn new(variable: impl Into<String>, state: impl Into<String>) -> Self {
        Binding {
            variable: variable.into(),
            state: state.into(),
        }
    }
}

/// One CPT row as a sentence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Premise {
    pub variable: String,
    pub given: Vec<Binding>,
    pub kind: PremiseKind,
    pub text: String,
    /// Index of the matching clause in the network's ProbLog program.
    pub clause_ref: usize,
}

pub(crate) fn capitalize(text: &str) -> String {
    let mut chars = text.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// `a`, `a and b`, `a, b and c`.
pub(crate) fn join_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [only] => only.clone(),
        [init @ .., last] => format!("{} and {last}", init.join(", ")),
    }
}

fn join_or(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [only] => only.clone(),
        [init @ .., last] => format!("{} or {last}", init.join(", ")),
    }
}

/// A probability as a percentage with at most four decimals.
pub fn format_percent(p: f64) -> String {
    let text = format!("{:.4}", p * 100.0);
    let text = text.trim_end_matches('0').trim_end_matches('.');
    format!("{text}%")
}

fn condition(network: &BayesianNetwork, given: &[Binding]) -> String {
    let parts: Vec<String> = given
        .iter()
        .map(|b| {
            let name = &network.variable(&b.variable).expect("validated").name;
            format!("{name} is {}", b.state)
        })
        .collect();
    join_and(&parts)
}

fn numeric_consequent(var: &RandomVariable, distribution: &[f64]) -> String {
    let parts: Vec<String> = var
        .states
        .iter()
        .zip(distribution)
        .map(|(s, &p)| format!("{s} with probability {}", format_percent(p)))
        .collect();
    format!("{} is {}", var.name, join_and(&parts))
}

fn wep_consequent<R: Rng + ?Sized>(
    var: &RandomVariable,
    distribution: &[f64],
    rng: &mut R,
) -> Result<(String, Option<String>), DatasetError> {
    match verbalize_distribution(distribution, rng)? {
        Verbalization::EquallyLikely => Ok((
            format!("{} is {EQUALLY_LIKELY} to be {}", var.name, join_or(&var.states)),
            None,
        )),
        Verbalization::Phrases {
            selections,
            most_likely,
        } => {
            let parts: Vec<String> = selections
                .iter()
                .zip(&var.states)
                .map(|(sel, s)| format!("it is {} that {} is {s}", sel.phrase, var.name))
                .collect();
            let note = most_likely.map(|states| {
                let names: Vec<String> = states.iter().map(|&i| var.states[i].clone()).collect();
                format!("The most likely value of {} is {}.", var.name, join_or(&names))
            });
            Ok((join_and(&parts), note))
        }
    }
}

/// One premise per CPT row, in topological order and then row order.
/// `rng` is only drawn from for [`PremiseKind::Wep`].
pub fn template_premises<R: Rng + ?Sized>(
    network: &BayesianNetwork,
    kind: PremiseKind,
    rng: &mut R,
) -> Result<Vec<Premise>, DatasetError> {
    let canonical = network.canonical()?;
    let mut premises = Vec::with_capacity(canonical.row_count());
    for id in topological_order(&canonical)? {
        let var = canonical.variable(&id).expect("validated");
        let cpt = canonical.cpt(&id).expect("validated");
        for row in &cpt.rows {
            let given: Vec<Binding> = cpt
                .parents
                .iter()
                .zip(&row.given)
                .map(|(p, s)| Binding::new(p, s))
                .collect();
            let (consequent, note) = match kind {
                PremiseKind::Numeric => (numeric_consequent(var, &row.distribution), None),
                PremiseKind::Wep => wep_consequent(var, &row.distribution, rng)?,
            };
            let mut text = if given.is_empty() {
                format!("{}.", capitalize(&consequent))
            } else {
                format!("If {}, then {consequent}.", condition(&canonical, &given))
            };
            if let Some(note) = note {
                text.push(' ');
                text.push_str(&note);
            }
            premises.push(Premise {
                variable: id.clone(),
                given,
                kind,
                text,
                clause_ref: premises.len(),
            });
        }
    }
    Ok(premises)
}
