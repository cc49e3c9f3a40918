//! Exact inference over a [`BayesianNetwork`].
//!
//! Two independent engines answer the same queries:
//!
//! * [`enumeration`] sums the chain-rule product over every world. It is the
//!   reference the rest of the crate is tested against.
//! * [`elimination`] multiplies and sums out factors in a min-degree order.
//!
//! Both work on a [`CompiledNetwork`], which maps ids and state names to dense
//! indices once so repeated queries do not re-resolve strings.

pub mod elimination;
pub mod enumeration;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{topological_order, BayesianNetwork, ModelError};

/// Tiny negative values from floating-point cancellation clamp to zero.
pub const NEGATIVE_NOISE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("IncompleteAssignment: variable `{0}` is not bound")]
    IncompleteAssignment(String),
    #[error("ZeroProbabilityEvidence: the evidence has probability zero")]
    ZeroProbabilityEvidence,
    #[error("QueryEvidenceOverlap: variable `{0}` is both queried and observed")]
    Overlap(String),
    #[error("InvalidQuery: {0}")]
    InvalidQuery(String),
    #[error("InternalConsistency: computed probability {0} is outside [0, 1]")]
    InternalConsistency(f64),
}

/// A set of `variable = state` bindings. Each variable is bound at most once.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assignment(BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(var: impl Into<String>, state: impl Into<String>) -> Self {
        let mut a = Self::new();
        a.0.insert(var.into(), state.into());
        a
    }

    /// Adds a binding; fails if the variable is already bound.
    pub fn bind(&mut self, var: impl Into<String>, state: impl Into<String>) -> Result<(), InferenceError> {
        let var = var.into();
        if self.0.contains_key(&var) {
            return Err(InferenceError::InvalidQuery(format!(
                "variable `{var}` bound twice"
            )));
        }
        self.0.insert(var, state.into());
        Ok(())
    }

    pub fn with(mut self, var: impl Into<String>, state: impl Into<String>) -> Self {
        self.0.insert(var.into(), state.into());
        self
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn contains(&self, var: &str) -> bool {
        self.0.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// Union of two assignments; fails if they bind a common variable.
    pub fn union(&self, other: &Assignment) -> Result<Assignment, InferenceError> {
        let mut out = self.clone();
        for (k, v) in other.iter() {
            out.bind(k, v)?;
        }
        Ok(out)
    }

    /// Parses `var=state` (the state may be wrapped in single quotes).
    pub fn parse_binding(text: &str) -> Result<(String, String), InferenceError> {
        let (var, state) = text.split_once('=').ok_or_else(|| {
            InferenceError::InvalidQuery(format!("expected `variable=state`, got `{text}`"))
        })?;
        let state = state.trim();
        let state = state
            .strip_prefix('\'')
            .and_then(|s| s.strip_suffix('\''))
            .unwrap_or(state);
        Ok((var.trim().to_string(), state.to_string()))
    }
}

impl FromIterator<(String, String)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (String, String)>>(iter: I) -> Self {
        Assignment(iter.into_iter().collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Enumeration,
    Elimination,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Enumeration => "enumeration",
            Method::Elimination => "elimination",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QueryResult {
    pub probability: f64,
    pub method: Method,
}

/// Allowed states per variable (`None` = unconstrained), indexed like
/// [`CompiledNetwork::variables`].
pub type StateMask = Vec<Option<Vec<bool>>>;

#[derive(Debug, Clone)]
pub struct CompiledVariable {
    pub id: String,
    pub card: usize,
    pub parents: Vec<usize>,
    /// Row-major over parent states (last parent fastest), then child state.
    pub table: Vec<f64>,
}

impl CompiledVariable {
    /// Probability of `state` given parent states taken from `world`.
    pub fn entry(&self, world: &[usize], cards: &[usize], state: usize) -> f64 {
        let mut row = 0;
        for &p in &self.parents {
            row = row * cards[p] + world[p];
        }
        self.table[row * self.card + state]
    }
}

/// A validated network with ids and states resolved to indices.
#[derive(Debug, Clone)]
pub struct CompiledNetwork<'a> {
    pub network: &'a BayesianNetwork,
    pub variables: Vec<CompiledVariable>,
    pub cards: Vec<usize>,
    /// Variable indices in topological order.
    pub order: Vec<usize>,
    index: HashMap<&'a str, usize>,
}

impl<'a> CompiledNetwork<'a> {
    pub fn new(network: &'a BayesianNetwork) -> Result<Self, InferenceError> {
        network.ensure_valid()?;
        let index: HashMap<&str, usize> = network
            .variables
            .iter()
            .enumerate()
            .map(|(i, v)| (v.id.as_str(), i))
            .collect();
        let cards: Vec<usize> = network.variables.iter().map(|v| v.cardinality()).collect();
        let mut variables = Vec::with_capacity(network.len());
        for var in &network.variables {
            let cpt = network.cpt(&var.id).expect("validated");
            let parents: Vec<usize> = cpt.parents.iter().map(|p| index[p.as_str()]).collect();
            let rows: usize = parents.iter().map(|&p| cards[p]).product();
            let mut table = vec![0.0; rows * var.cardinality()];
            for row in &cpt.rows {
                let mut r = 0;
                for (&p, state) in parents.iter().zip(&row.given) {
                    let s = network.variables[p].state_index(state).expect("validated");
                    r = r * cards[p] + s;
                }
                table[r * var.cardinality()..(r + 1) * var.cardinality()].copy_from_slice(&row.distribution);
            }
            variables.push(CompiledVariable {
                id: var.id.clone(),
                card: var.cardinality(),
                parents,
                table,
            });
        }
        let order = topological_order(network)?
            .iter()
            .map(|id| index[id.as_str()])
            .collect();
        Ok(CompiledNetwork {
            network,
            variables,
            cards,
            order,
            index,
        })
    }

    pub fn var_index(&self, id: &str) -> Result<usize, InferenceError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| ModelError::UnknownVariable(id.to_string()).into())
    }

    pub fn state_index(&self, var: usize, state: &str) -> Result<usize, InferenceError> {
        let v = &self.network.variables[var];
        v.state_index(state).ok_or_else(|| {
            ModelError::UnknownState {
                variable: v.id.clone(),
                state: state.to_string(),
            }
            .into()
        })
    }

    pub fn empty_mask(&self) -> StateMask {
        vec![None; self.variables.len()]
    }

    /// Mask allowing only the bound states of `assignment`.
    pub fn mask(&self, assignment: &Assignment) -> Result<StateMask, InferenceError> {
        let mut mask = self.empty_mask();
        for (var, state) in assignment.iter() {
            let v = self.var_index(var)?;
            let s = self.state_index(v, state)?;
            restrict(&mut mask, v, self.cards[v], &[s]);
        }
        Ok(mask)
    }

    /// Chain-rule product for a full world given as state indices.
    pub fn world_probability(&self, world: &[usize]) -> f64 {
        self.variables
            .iter()
            .enumerate()
            .map(|(i, v)| v.entry(world, &self.cards, world[i]))
            .product()
    }
}

/// Intersects the allowed states of `var` with `states`.
pub fn restrict(mask: &mut StateMask, var: usize, card: usize, states: &[usize]) {
    let mut allowed = vec![false; card];
    for &s in states {
        allowed[s] = true;
    }
    match &mut mask[var] {
        Some(existing) => existing.iter_mut().zip(allowed).for_each(|(e, a)| *e = *e && a),
        slot @ None => *slot = Some(allowed),
    }
}

/// Intersection of two masks.
pub fn intersect(a: &StateMask, b: &StateMask) -> StateMask {
    a.iter()
        .zip(b)
        .map(|(x, y)| match (x, y) {
            (None, None) => None,
            (Some(m), None) | (None, Some(m)) => Some(m.clone()),
            (Some(m), Some(n)) => Some(m.iter().zip(n).map(|(p, q)| *p && *q).collect()),
        })
        .collect()
}

pub(crate) fn clamp_probability(p: f64) -> Result<f64, InferenceError> {
    if !(-NEGATIVE_NOISE..=1.0 + NEGATIVE_NOISE).contains(&p) {
        return Err(InferenceError::InternalConsistency(p));
    }
    Ok(p.clamp(0.0, 1.0))
}

/// `P(query and evidence) / P(evidence)` from the two masses.
pub(crate) fn ratio(joint: f64, evidence: f64) -> Result<f64, InferenceError> {
    if evidence <= 0.0 {
        return Err(InferenceError::ZeroProbabilityEvidence);
    }
    clamp_probability(joint / evidence)
}

fn check_disjoint(query: &Assignment, evidence: &Assignment) -> Result<(), InferenceError> {
    if query.len() != 1 {
        return Err(InferenceError::InvalidQuery(format!(
            "expected exactly one query binding, got {}",
            query.len()
        )));
    }
    match query.iter().find(|(v, _)| evidence.contains(v)) {
        Some((v, _)) => Err(InferenceError::Overlap(v.to_string())),
        None => Ok(()),
    }
}

/// Product of CPT entries selected by a full assignment.
pub fn joint_probability(network: &BayesianNetwork, assignment: &Assignment) -> Result<f64, InferenceError> {
    let compiled = CompiledNetwork::new(network)?;
    let mut world = vec![usize::MAX; compiled.variables.len()];
    for (var, state) in assignment.iter() {
        let v = compiled.var_index(var)?;
        world[v] = compiled.state_index(v, state)?;
    }
    if let Some(i) = world.iter().position(|&s| s == usize::MAX) {
        return Err(InferenceError::IncompleteAssignment(
            compiled.variables[i].id.clone(),
        ));
    }
    Ok(compiled.world_probability(&world))
}

/// Sum of the joint over all completions of `assignment`; 1 for `{}`.
pub fn marginal(network: &BayesianNetwork, assignment: &Assignment) -> Result<f64, InferenceError> {
    let compiled = CompiledNetwork::new(network)?;
    if assignment.is_empty() {
        return Ok(1.0);
    }
    let mask = compiled.mask(assignment)?;
    clamp_probability(enumeration::mass(&compiled, &mask))
}

/// `P(query | evidence)` by enumeration.
pub fn conditional_query(
    network: &BayesianNetwork,
    query: &Assignment,
    evidence: &Assignment,
) -> Result<QueryResult, InferenceError> {
    check_disjoint(query, evidence)?;
    let compiled = CompiledNetwork::new(network)?;
    let q = compiled.mask(query)?;
    let e = compiled.mask(evidence)?;
    Ok(QueryResult {
        probability: enumeration::conditional(&compiled, &q, &e)?,
        method: Method::Enumeration,
    })
}

/// `P(query | evidence)` by variable elimination.
pub fn eliminate(
    network: &BayesianNetwork,
    query: &Assignment,
    evidence: &Assignment,
) -> Result<QueryResult, InferenceError> {
    check_disjoint(query, evidence)?;
    let compiled = CompiledNetwork::new(network)?;
    let (var, state) = query.iter().next().expect("one binding");
    let v = compiled.var_index(var)?;
    let s = compiled.state_index(v, state)?;
    let e = compiled.mask(evidence)?;
    Ok(QueryResult {
        probability: elimination::conditional(&compiled, v, &[s], &e)?,
        method: Method::Elimination,
    })
}

/// Dispatches on `method`.
pub fn query_with(
    network: &BayesianNetwork,
    query: &Assignment,
    evidence: &Assignment,
    method: Method,
) -> Result<QueryResult, InferenceError> {
    match method {
        Method::Enumeration => conditional_query(network, query, evidence),
        Method::Elimination => eliminate(network, query, evidence),
    }
}

/// Posterior distribution of `var` given `evidence`, by elimination.
pub fn posterior(
    network: &BayesianNetwork,
    var: &str,
    evidence: &Assignment,
) -> Result<Vec<f64>, InferenceError> {
    let compiled = CompiledNetwork::new(network)?;
    let v = compiled.var_index(var)?;
    let e = compiled.mask(evidence)?;
    elimination::posterior(&compiled, v, &e)
}
