//! Sampling of evidence and query pairs, and their reasoning labels.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::inference::{clamp_probability, elimination, restrict, CompiledNetwork};
use crate::model::BayesianNetwork;

use super::premises::{capitalize, Binding};
use super::DatasetError;

/// Resampling attempts before evidence is declared unsatisfiable.
pub const MAX_EVIDENCE_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReasoningType {
    Causal,
    Evidential,
    ExplainingAway,
}

impl ReasoningType {
    pub const ALL: [ReasoningType; 3] = [
        ReasoningType::Causal,
        ReasoningType::Evidential,
        ReasoningType::ExplainingAway,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ReasoningType::Causal => "causal",
            ReasoningType::Evidential => "evidential",
            ReasoningType::ExplainingAway => "explaining_away",
        }
    }
}

impl fmt::Display for ReasoningType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QePair {
    /// Observations in the order they were drawn.
    pub evidence: Vec<Binding>,
    pub evidence_texts: Vec<String>,
    pub query: Binding,
    pub question_text: String,
    pub gold: f64,
    pub reasoning_types: Vec<ReasoningType>,
    pub primary_type: Option<ReasoningType>,
}

pub fn evidence_text(network: &BayesianNetwork, binding: &Binding) -> String {
    let name = &network.variable(&binding.variable).expect("known variable").name;
    format!("{} is {}.", capitalize(name), binding.state)
}

pub fn question_text(network: &BayesianNetwork, binding: &Binding) -> String {
    let name = &network.variable(&binding.variable).expect("known variable").name;
    format!(
        "What is the likelihood of {name} having the value {}?",
        binding.state
    )
}

/// Draws observations and a query for `network`.
///
/// The number of observations is uniform in `1..=n-1`, the observed
/// variables a uniform subset, each observed state uniform. Draws whose
/// evidence has probability zero are discarded and redrawn.
pub fn sample_qe<R: Rng + ?Sized>(network: &BayesianNetwork, rng: &mut R) -> Result<QePair, DatasetError> {
    let n = network.len();
    if n < 2 {
        return Err(DatasetError::TooFewVariables(n));
    }
    let compiled = CompiledNetwork::new(network)?;
    for _ in 0..MAX_EVIDENCE_ATTEMPTS {
        let j = rng.gen_range(1..n);
        let observed = sample(rng, n, j).into_vec();
        let mut mask = compiled.empty_mask();
        let mut evidence = Vec::with_capacity(j);
        for &v in &observed {
            let s = rng.gen_range(0..compiled.cards[v]);
            restrict(&mut mask, v, compiled.cards[v], &[s]);
            let var = &network.variables[v];
            evidence.push(Binding::new(&var.id, &var.states[s]));
        }
        let free: Vec<usize> = (0..n).filter(|v| !observed.contains(v)).collect();
        let q = free[rng.gen_range(0..free.len())];
        let qs = rng.gen_range(0..compiled.cards[q]);

        let joint = elimination::joint_with_evidence(&compiled, q, &mask);
        let total: f64 = joint.iter().sum();
        if total <= 0.0 {
            continue;
        }
        let gold = clamp_probability(joint[qs] / total)?;
        let var = &network.variables[q];
        let query = Binding::new(&var.id, &var.states[qs]);
        let observed_ids: Vec<&str> = evidence.iter().map(|b| b.variable.as_str()).collect();
        let (types, primary) = classify_reasoning(network, &query.variable, &observed_ids);
        return Ok(QePair {
            evidence_texts: evidence.iter().map(|b| evidence_text(network, b)).collect(),
            question_text: question_text(network, &query),
            evidence,
            query,
            gold,
            reasoning_types: types.into_iter().collect(),
            primary_type: primary,
        });
    }
    Err(DatasetError::UnsatisfiableEvidence {
        attempts: MAX_EVIDENCE_ATTEMPTS,
    })
}

/// Labels a query by the direct relations between the query variable and
/// the observed ones:
///
/// * causal: a parent of the query is observed;
/// * evidential: a child of the query is observed;
/// * explaining away: an observed child of the query has another parent
///   that is also observed.
///
/// The primary label is the most specific one present, in the order
/// explaining away, evidential, causal.
pub fn classify_reasoning(
    network: &BayesianNetwork,
    query: &str,
    observed: &[&str],
) -> (BTreeSet<ReasoningType>, Option<ReasoningType>) {
    let observed: BTreeSet<&str> = observed.iter().copied().collect();
    let parents_of = |v: &str| -> Vec<&str> {
        network
            .cpt(v)
            .map(|c| c.parents.iter().map(String::as_str).collect())
            .unwrap_or_default()
    };
    let children: Vec<&str> = network
        .cpts
        .iter()
        .filter(|c| c.parents.iter().any(|p| p == query))
        .map(|c| c.variable.as_str())
        .collect();

    let mut types = BTreeSet::new();
    if parents_of(query).iter().any(|p| observed.contains(p)) {
        types.insert(ReasoningType::Causal);
    }
    for child in children.iter().filter(|c| observed.contains(*c)) {
        types.insert(ReasoningType::Evidential);
        if parents_of(child)
            .iter()
            .any(|p| *p != query && observed.contains(p))
        {
            types.insert(ReasoningType::ExplainingAway);
        }
    }
    let primary = [
        ReasoningType::ExplainingAway,
        ReasoningType::Evidential,
        ReasoningType::Causal,
    ]
    .into_iter()
    .find(|t| types.contains(t));
    (types, primary)
}
