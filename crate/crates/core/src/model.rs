//! Bayesian networks over categorical random variables.
//!
//! A [`BayesianNetwork`] is plain data: a list of variables and one
//! conditional probability table per variable. Construction never fails;
//! [`validate`] reports every structural or numeric problem it finds, and the
//! inference entry points refuse networks that do not validate.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute tolerance on the sum of a CPT row.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

// Slack for binary rounding of decimal inputs: "0.1531 + 0.846901" sums to
// 1.000001 + 1.4e-16 in f64 and must still count as inside the tolerance.
const ROW_SUM_SLACK: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("UnknownVariable: no variable with id `{0}`")]
    UnknownVariable(String),
    #[error("UnknownState: variable `{variable}` has no state `{state}`")]
    UnknownState { variable: String, state: String },
    #[error("CycleDetected: the parent relation is cyclic among {0:?}")]
    Cycle(Vec<String>),
    #[error("InvalidNetwork: {0}")]
    Invalid(ValidationReport),
    #[error("ParseError: line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("IoError: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomVariable {
    pub id: String,
    pub name: String,
    pub states: Vec<String>,
}

impl RandomVariable {
    pub fn new(id: impl Into<String>, name: impl Into<String>, states: &[&str]) -> Self {
        RandomVariable {
            id: id.into(),
            name: name.into(),
            states: states.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.states.len()
    }

    pub fn is_binary(&self) -> bool {
        self.states.len() == 2
    }

    pub fn state_index(&self, state: &str) -> Option<usize> {
        self.states.iter().position(|s| s == state)
    }
}

/// One row of a CPT: the parent states (aligned with [`Cpt::parents`]) and the
/// child's distribution (aligned with the child's state list).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CptRow {
    pub given: Vec<String>,
    pub distribution: Vec<f64>,
}

impl CptRow {
    pub fn new(given: &[&str], distribution: &[f64]) -> Self {
        CptRow {
            given: given.iter().map(|s| s.to_string()).collect(),
            distribution: distribution.to_vec(),
        }
    }

    /// The row's parent assignment as `(parent id, state)` pairs.
    pub fn assignment<'a>(&'a self, cpt: &'a Cpt) -> impl Iterator<Item = (&'a str, &'a str)> {
        cpt.parents
            .iter()
            .map(String::as_str)
            .zip(self.given.iter().map(String::as_str))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    pub variable: String,
    pub parents: Vec<String>,
    pub rows: Vec<CptRow>,
}

impl Cpt {
    pub fn new(variable: impl Into<String>, parents: &[&str], rows: Vec<CptRow>) -> Self {
        Cpt {
            variable: variable.into(),
            parents: parents.iter().map(|s| s.to_string()).collect(),
            rows,
        }
    }

    pub fn root(variable: impl Into<String>, distribution: &[f64]) -> Self {
        Cpt {
            variable: variable.into(),
            parents: Vec::new(),
            rows: vec![CptRow::new(&[], distribution)],
        }
    }

    pub fn is_root(&self) -> bool {
        self.parents.is_empty()
    }

    pub fn row_for(&self, given: &[&str]) -> Option<&CptRow> {
        self.rows
            .iter()
            .find(|r| r.given.iter().map(String::as_str).eq(given.iter().copied()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BayesianNetwork {
    pub name: String,
    pub source: Option<String>,
    pub variables: Vec<RandomVariable>,
    pub cpts: Vec<Cpt>,
}

impl BayesianNetwork {
    pub fn new(name: impl Into<String>, variables: Vec<RandomVariable>, cpts: Vec<Cpt>) -> Self {
        BayesianNetwork {
            name: name.into(),
            source: None,
            variables,
            cpts,
        }
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }

    /// Builds the network and fails unless it validates.
    pub fn try_new(
        name: impl Into<String>,
        variables: Vec<RandomVariable>,
        cpts: Vec<Cpt>,
    ) -> Result<Self, ModelError> {
        let net = Self::new(name, variables, cpts);
        net.ensure_valid()?;
        Ok(net)
    }

    pub fn ensure_valid(&self) -> Result<(), ModelError> {
        let report = validate(self);
        if report.is_valid() {
            Ok(())
        } else {
            Err(ModelError::Invalid(report))
        }
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variable(&self, id: &str) -> Option<&RandomVariable> {
        self.variables.iter().find(|v| v.id == id)
    }

    pub fn require_variable(&self, id: &str) -> Result<&RandomVariable, ModelError> {
        self.variable(id)
            .ok_or_else(|| ModelError::UnknownVariable(id.to_string()))
    }

    pub fn cpt(&self, id: &str) -> Option<&Cpt> {
        self.cpts.iter().find(|c| c.variable == id)
    }

    pub fn variable_ids(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.id.as_str())
    }

    /// Number of CPT rows summed over all variables.
    pub fn row_count(&self) -> usize {
        self.cpts.iter().map(|c| c.rows.len()).sum()
    }

    /// Copy with variables and CPTs in topological order (ties broken by id)
    /// and every CPT's rows in parent-product order.
    pub fn canonical(&self) -> Result<BayesianNetwork, ModelError> {
        let order = topological_order(self)?;
        let mut variables = Vec::with_capacity(order.len());
        let mut cpts = Vec::with_capacity(order.len());
        for id in &order {
            variables.push(self.require_variable(id)?.clone());
            let mut cpt = self
                .cpt(id)
                .cloned()
                .ok_or_else(|| ModelError::UnknownVariable(id.clone()))?;
            let parent_vars: Vec<&RandomVariable> = cpt
                .parents
                .iter()
                .map(|p| self.require_variable(p))
                .collect::<Result<_, _>>()?;
            cpt.rows.sort_by_key(|row| {
                row.given
                    .iter()
                    .zip(&parent_vars)
                    .map(|(s, v)| v.state_index(s).unwrap_or(usize::MAX))
                    .collect::<Vec<_>>()
            });
            cpts.push(cpt);
        }
        Ok(BayesianNetwork {
            name: self.name.clone(),
            source: self.source.clone(),
            variables,
            cpts,
        })
    }

    /// Rescales every CPT row to sum to one. Rows summing to zero are left alone.
    pub fn renormalized(&self) -> BayesianNetwork {
        let mut net = self.clone();
        for cpt in &mut net.cpts {
            for row in &mut cpt.rows {
                let sum: f64 = row.distribution.iter().sum();
                if sum > 0.0 {
                    row.distribution.iter_mut().for_each(|p| *p /= sum);
                }
            }
        }
        net
    }
}

/// All assignments of the given state spaces, last position varying fastest.
pub fn state_product(cardinalities: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = cardinalities.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut current = vec![0usize; cardinalities.len()];
    for _ in 0..total {
        out.push(current.clone());
        for pos in (0..current.len()).rev() {
            current[pos] += 1;
            if current[pos] < cardinalities[pos] {
                break;
            }
            current[pos] = 0;
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateVariable {
        variable: String,
    },
    TooFewStates {
        variable: String,
        count: usize,
    },
    EmptyStateName {
        variable: String,
    },
    DuplicateState {
        variable: String,
        state: String,
    },
    MissingCpt {
        variable: String,
    },
    DuplicateCpt {
        variable: String,
    },
    CptForUnknownVariable {
        variable: String,
    },
    DanglingParent {
        variable: String,
        parent: String,
    },
    DuplicateParent {
        variable: String,
        parent: String,
    },
    RowShape {
        variable: String,
        row: usize,
        detail: String,
    },
    UnknownParentState {
        variable: String,
        row: usize,
        parent: String,
        state: String,
    },
    ProbabilityOutOfRange {
        variable: String,
        row: usize,
        value: f64,
    },
    RowSum {
        variable: String,
        row: usize,
        sum: f64,
    },
    MissingRow {
        variable: String,
        given: Vec<String>,
    },
    DuplicateRow {
        variable: String,
        given: Vec<String>,
    },
    Cycle {
        variables: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVariable { variable } => {
                write!(f, "variable `{variable}` is declared more than once")
            }
            Violation::TooFewStates { variable, count } => {
                write!(
                    f,
                    "variable `{variable}` has {count} state(s); at least 2 required"
                )
            }
            Violation::EmptyStateName { variable } => {
                write!(f, "variable `{variable}` has an empty state name")
            }
            Violation::DuplicateState { variable, state } => {
                write!(f, "variable `{variable}` lists state `{state}` twice")
            }
            Violation::MissingCpt { variable } => write!(f, "variable `{variable}` has no CPT"),
            Violation::DuplicateCpt { variable } => {
                write!(f, "variable `{variable}` has more than one CPT")
            }
            Violation::CptForUnknownVariable { variable } => {
                write!(f, "CPT for undeclared variable `{variable}`")
            }
            Violation::DanglingParent { variable, parent } => {
                write!(f, "CPT of `{variable}` references undeclared parent `{parent}`")
            }
            Violation::DuplicateParent { variable, parent } => {
                write!(f, "CPT of `{variable}` lists parent `{parent}` twice")
            }
            Violation::RowShape {
                variable,
                row,
                detail,
            } => {
                write!(f, "CPT of `{variable}`, row {row}: {detail}")
            }
            Violation::UnknownParentState {
                variable,
                row,
                parent,
                state,
            } => write!(
                f,
                "CPT of `{variable}`, row {row}: parent `{parent}` has no state `{state}`"
            ),
            Violation::ProbabilityOutOfRange { variable, row, value } => write!(
                f,
                "CPT of `{variable}`, row {row}: probability {value} outside [0, 1]"
            ),
            Violation::RowSum { variable, row, sum } => {
                write!(f, "CPT of `{variable}`, row {row}: distribution sums to {sum}")
            }
            Violation::MissingRow { variable, given } => {
                write!(f, "CPT of `{variable}` has no row for parent states {given:?}")
            }
            Violation::DuplicateRow { variable, given } => {
                write!(
                    f,
                    "CPT of `{variable}` has several rows for parent states {given:?}"
                )
            }
            Violation::Cycle { variables } => {
                write!(f, "cycle through variables {variables:?}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
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
            return write!(f, "valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Lists every invariant violation of `network`. An empty report means valid.
pub fn validate(network: &BayesianNetwork) -> ValidationReport {
    let mut violations = Vec::new();

    let mut declared: HashMap<&str, &RandomVariable> = HashMap::new();
    for var in &network.variables {
        if declared.insert(var.id.as_str(), var).is_some() {
            violations.push(Violation::DuplicateVariable {
                variable: var.id.clone(),
            });
        }
        if var.states.len() < 2 {
            violations.push(Violation::TooFewStates {
                variable: var.id.clone(),
                count: var.states.len(),
            });
        }
        let mut seen = HashSet::new();
        for state in &var.states {
            if state.is_empty() {
                violations.push(Violation::EmptyStateName {
                    variable: var.id.clone(),
                });
            } else if !seen.insert(state.as_str()) {
                violations.push(Violation::DuplicateState {
                    variable: var.id.clone(),
                    state: state.clone(),
                });
            }
        }
    }

    let mut cpt_count: HashMap<&str, usize> = HashMap::new();
    for cpt in &network.cpts {
        *cpt_count.entry(cpt.variable.as_str()).or_default() += 1;
    }
    for var in &network.variables {
        match cpt_count.get(var.id.as_str()) {
            None => violations.push(Violation::MissingCpt {
                variable: var.id.clone(),
            }),
            Some(&n) if n > 1 => violations.push(Violation::DuplicateCpt {
                variable: var.id.clone(),
            }),
            _ => {}
        }
    }

    let mut edges_ok = true;
    for cpt in &network.cpts {
        let Some(child) = declared.get(cpt.variable.as_str()) else {
            violations.push(Violation::CptForUnknownVariable {
                variable: cpt.variable.clone(),
            });
            continue;
        };
        let mut parent_vars = Vec::with_capacity(cpt.parents.len());
        let mut parents_ok = true;
        let mut seen = HashSet::new();
        for parent in &cpt.parents {
            if !seen.insert(parent.as_str()) {
                violations.push(Violation::DuplicateParent {
                    variable: cpt.variable.clone(),
                    parent: parent.clone(),
                });
                parents_ok = false;
            }
            match declared.get(parent.as_str()) {
                Some(v) => parent_vars.push(*v),
                None => {
                    violations.push(Violation::DanglingParent {
                        variable: cpt.variable.clone(),
                        parent: parent.clone(),
                    });
                    parents_ok = false;
                    edges_ok = false;
                }
            }
        }
        check_rows(
            cpt,
            child,
            parents_ok.then_some(&parent_vars[..]),
            &mut violations,
        );
    }

    if edges_ok {
        for cycle in cycles(network) {
            violations.push(Violation::Cycle { variables: cycle });
        }
    }

    ValidationReport { violations }
}

fn check_rows(
    cpt: &Cpt,
    child: &RandomVariable,
    parents: Option<&[&RandomVariable]>,
    violations: &mut Vec<Violation>,
) {
    let mut covered: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
    let mut rows_ok = true;
    for (index, row) in cpt.rows.iter().enumerate() {
        if row.distribution.len() != child.states.len() {
            violations.push(Violation::RowShape {
                variable: cpt.variable.clone(),
                row: index,
                detail: format!(
                    "{} probabilities for {} states",
                    row.distribution.len(),
                    child.states.len()
                ),
            });
        }
        let mut out_of_range = false;
        for &p in &row.distribution {
            if !(0.0..=1.0).contains(&p) {
                violations.push(Violation::ProbabilityOutOfRange {
                    variable: cpt.variable.clone(),
                    row: index,
                    value: p,
                });
                out_of_range = true;
            }
        }
        let sum: f64 = row.distribution.iter().sum();
        if !out_of_range && (sum - 1.0).abs() > ROW_SUM_TOLERANCE + ROW_SUM_SLACK {
            violations.push(Violation::RowSum {
                variable: cpt.variable.clone(),
                row: index,
                sum,
            });
        }

        if row.given.len() != cpt.parents.len() {
            violations.push(Violation::RowShape {
                variable: cpt.variable.clone(),
                row: index,
                detail: format!(
                    "{} parent states for {} parents",
                    row.given.len(),
                    cpt.parents.len()
                ),
            });
            rows_ok = false;
            continue;
        }
        let Some(parents) = parents else { continue };
        let mut key = Vec::with_capacity(parents.len());
        for (parent, state) in parents.iter().zip(&row.given) {
            match parent.state_index(state) {
                Some(i) => key.push(i),
                None => {
                    violations.push(Violation::UnknownParentState {
                        variable: cpt.variable.clone(),
                        row: index,
                        parent: parent.id.clone(),
                        state: state.clone(),
                    });
                    rows_ok = false;
                }
            }
        }
        if key.len() == parents.len() {
            *covered.entry(key).or_default() += 1;
        }
    }

    let Some(parents) = parents else { return };
    if !rows_ok {
        return;
    }
    let cards: Vec<usize> = parents.iter().map(|p| p.cardinality()).collect();
    for combo in state_product(&cards) {
        let given = || {
            combo
                .iter()
                .zip(parents)
                .map(|(&i, p)| p.states[i].clone())
                .collect::<Vec<_>>()
        };
        match covered.get(&combo) {
            None => violations.push(Violation::MissingRow {
                variable: cpt.variable.clone(),
                given: given(),
            }),
            Some(&n) if n > 1 => violations.push(Violation::DuplicateRow {
                variable: cpt.variable.clone(),
                given: given(),
            }),
            _ => {}
        }
    }
}

/// Strongly connected components that contain a cycle, each sorted by id.
fn cycles(network: &BayesianNetwork) -> Vec<Vec<String>> {
    let mut graph = DiGraph::<&str, ()>::new();
    let mut nodes = HashMap::new();
    for var in &network.variables {
        nodes
            .entry(var.id.as_str())
            .or_insert_with(|| graph.add_node(var.id.as_str()));
    }
    let mut self_loops = BTreeSet::new();
    for cpt in &network.cpts {
        let Some(&child) = nodes.get(cpt.variable.as_str()) else {
            continue;
        };
        for parent in &cpt.parents {
            if let Some(&p) = nodes.get(parent.as_str()) {
                if p == child {
                    self_loops.insert(parent.clone());
                }
                graph.add_edge(p, child, ());
            }
        }
    }
    let mut out: Vec<Vec<String>> = tarjan_scc(&graph)
        .into_iter()
        .filter_map(|scc| {
            let mut ids: Vec<String> = scc.iter().map(|&n| graph[n].to_string()).collect();
            ids.sort();
            (ids.len() > 1 || self_loops.contains(&ids[0])).then_some(ids)
        })
        .collect();
    out.sort();
    out
}

/// Orders variables so every variable follows its parents; among the
/// variables ready at each step the lexicographically smallest id goes first.
pub fn topological_order(network: &BayesianNetwork) -> Result<Vec<String>, ModelError> {
    let ids: BTreeSet<&str> = network.variable_ids().collect();
    let mut indegree: BTreeMap<&str, usize> = ids.iter().map(|&id| (id, 0)).collect();
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    for cpt in &network.cpts {
        if !ids.contains(cpt.variable.as_str()) {
            continue;
        }
        for parent in &cpt.parents {
            if !ids.contains(parent.as_str()) {
                return Err(ModelError::UnknownVariable(parent.clone()));
            }
            *indegree.get_mut(cpt.variable.as_str()).expect("declared") += 1;
            children
                .entry(parent.as_str())
                .or_default()
                .push(cpt.variable.as_str());
        }
    }

    let mut ready: BinaryHeap<Reverse<&str>> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| Reverse(id))
        .collect();
    let mut order = Vec::with_capacity(ids.len());
    while let Some(Reverse(id)) = ready.pop() {
        order.push(id.to_string());
        for &child in children.get(id).map(Vec::as_slice).unwrap_or(&[]) {
            let d = indegree.get_mut(child).expect("declared");
            *d -= 1;
            if *d == 0 {
                ready.push(Reverse(child));
            }
        }
    }
    if order.len() != ids.len() {
        let placed: HashSet<&str> = order.iter().map(String::as_str).collect();
        let stuck = ids
            .iter()
            .filter(|id| !placed.contains(*id))
            .map(|id| id.to_string())
            .collect();
        return Err(ModelError::Cycle(stuck));
    }
    Ok(order)
}

/// Parents of `var` in CPT order.
pub fn parents(network: &BayesianNetwork, var: &str) -> Result<Vec<String>, ModelError> {
    network.require_variable(var)?;
    Ok(network.cpt(var).map(|c| c.parents.clone()).unwrap_or_default())
}

/// Variables listing `var` as a parent, sorted by id.
pub fn children(network: &BayesianNetwork, var: &str) -> Result<Vec<String>, ModelError> {
    network.require_variable(var)?;
    let mut out: Vec<String> = network
        .cpts
        .iter()
        .filter(|c| c.parents.iter().any(|p| p == var))
        .map(|c| c.variable.clone())
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}
