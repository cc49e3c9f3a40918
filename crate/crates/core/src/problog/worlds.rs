//! Query answering by enumerating total choices.
//!
//! Every clause independently picks one of its heads or, when the head
//! probabilities sum to less than one, no head at all. A chosen head holds in
//! a world whenever the clause body holds in that world's least model.
//!
//! Clauses are visited in dependency order. A clause outside any recursive
//! component whose body is already false cannot affect the model, so its
//! choice is summed out on the spot instead of branched on. Recursive
//! components branch over all of their clauses and then take the fixpoint.
//!
//! Like ProbLog, a predicate that no clause head defines is an error rather
//! than silently false.

use std::collections::{HashMap, HashSet};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

use crate::inference::InferenceError;

use super::{Atom, ProblogError, ProblogProgram};

/// Largest number of worlds visited before giving up.
pub const DEFAULT_WORLD_LIMIT: usize = 1 << 20;

const RESIDUAL_EPSILON: f64 = 1e-12;

struct GroundClause {
    heads: Vec<(f64, usize)>,
    residual: f64,
    body: Vec<(usize, bool)>,
}

struct Unit {
    clauses: Vec<usize>,
    recursive: bool,
}

struct Search<'a> {
    clauses: &'a [GroundClause],
    units: &'a [Unit],
    /// Evidence atoms that become final after each unit.
    checks: &'a [Vec<(usize, bool)>],
    queries: &'a [usize],
    truth: Vec<bool>,
    evidence_mass: f64,
    query_mass: Vec<f64>,
    worlds: usize,
    limit: usize,
}

impl Search<'_> {
    fn body_holds(&self, clause: usize) -> bool {
        self.clauses[clause]
            .body
            .iter()
            .all(|&(atom, negated)| self.truth[atom] != negated)
    }

    fn consistent_after(&self, unit: usize) -> bool {
        self.checks[unit]
            .iter()
            .all(|&(atom, value)| self.truth[atom] == value)
    }

    fn walk(&mut self, unit: usize, weight: f64) -> Result<(), ProblogError> {
        if unit == self.units.len() {
            self.worlds += 1;
            if self.worlds > self.limit {
                return Err(ProblogError::ChoiceBound { limit: self.limit });
            }
            self.evidence_mass += weight;
            for (i, &q) in self.queries.iter().enumerate() {
                if self.truth[q] {
                    self.query_mass[i] += weight;
                }
            }
            return Ok(());
        }
        if self.units[unit].recursive {
            let mut choices = Vec::with_capacity(self.units[unit].clauses.len());
            self.choose(unit, &mut choices, weight)
        } else {
            let c = self.units[unit].clauses[0];
            if !self.body_holds(c) {
                return self.next(unit, weight);
            }
            let clause = &self.clauses[c];
            for &(p, head) in &clause.heads {
                if p <= 0.0 {
                    continue;
                }
                let was = self.truth[head];
                self.truth[head] = true;
                let result = self.next(unit, weight * p);
                self.truth[head] = was;
                result?;
            }
            if clause.residual > RESIDUAL_EPSILON {
                self.next(unit, weight * clause.residual)?;
            }
            Ok(())
        }
    }

    fn next(&mut self, unit: usize, weight: f64) -> Result<(), ProblogError> {
        if self.consistent_after(unit) {
            self.walk(unit + 1, weight)
        } else {
            Ok(())
        }
    }

    /// Branches over the choices of a recursive component, one clause at a
    /// time, then closes the chosen heads under the component's rules.
    fn choose(
        &mut self,
        unit: usize,
        choices: &mut Vec<Option<usize>>,
        weight: f64,
    ) -> Result<(), ProblogError> {
        let members = &self.units[unit].clauses;
        if choices.len() == members.len() {
            let saved = self.truth.clone();
            loop {
                let mut changed = false;
                for (&c, choice) in members.iter().zip(choices.iter()) {
                    if let Some(head) = *choice {
                        if !self.truth[head] && self.body_holds(c) {
                            self.truth[head] = true;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            let result = self.next(unit, weight);
            self.truth = saved;
            return result;
        }
        let clause = &self.clauses[members[choices.len()]];
        for &(p, head) in &clause.heads {
            if p <= 0.0 {
                continue;
            }
            choices.push(Some(head));
            let result = self.choose(unit, choices, weight * p);
            choices.pop();
            result?;
        }
        if clause.residual > RESIDUAL_EPSILON {
            choices.push(None);
            let result = self.choose(unit, choices, weight * clause.residual);
            choices.pop();
            result?;
        }
        Ok(())
    }
}

/// [`enumerate_worlds_with_limit`] with [`DEFAULT_WORLD_LIMIT`].
pub fn enumerate_worlds(program: &ProblogProgram) -> Result<Vec<(Atom, f64)>, ProblogError> {
    enumerate_worlds_with_limit(program, DEFAULT_WORLD_LIMIT)
}

/// Answers every query of `program`, in query order, by summing the
/// probabilities of the worlds consistent with the evidence.
pub fn enumerate_worlds_with_limit(
    program: &ProblogProgram,
    limit: usize,
) -> Result<Vec<(Atom, f64)>, ProblogError> {
    if program.queries.is_empty() {
        return Err(ProblogError::NoQueries);
    }
    program.validate()?;

    let mut index: HashMap<&Atom, usize> = HashMap::new();
    let all_atoms = program
        .clauses
        .iter()
        .flat_map(|c| {
            c.heads
                .iter()
                .map(|h| &h.atom)
                .chain(c.body.iter().map(|l| &l.atom))
        })
        .chain(program.evidence.iter().map(|e| &e.atom))
        .chain(program.queries.iter());
    for atom in all_atoms {
        if !atom.is_ground() {
            return Err(ProblogError::UnsupportedFragment(format!(
                "`{atom}` is not ground"
            )));
        }
        let next = index.len();
        index.entry(atom).or_insert(next);
    }

    let defined: HashSet<(&str, usize)> = program
        .clauses
        .iter()
        .flat_map(|c| {
            c.heads
                .iter()
                .map(|h| (h.atom.predicate.as_str(), h.atom.args.len()))
        })
        .collect();
    let used = program
        .clauses
        .iter()
        .flat_map(|c| c.body.iter().map(|l| &l.atom))
        .chain(program.evidence.iter().map(|e| &e.atom))
        .chain(program.queries.iter());
    for atom in used {
        if !defined.contains(&(atom.predicate.as_str(), atom.args.len())) {
            return Err(ProblogError::UnknownClause(atom.compact()));
        }
    }

    let clauses: Vec<GroundClause> = program
        .clauses
        .iter()
        .map(|c| GroundClause {
            heads: c.heads.iter().map(|h| (h.probability, index[&h.atom])).collect(),
            residual: 1.0 - c.head_sum(),
            body: c.body.iter().map(|l| (index[&l.atom], l.negated)).collect(),
        })
        .collect();

    let mut defined_by: Vec<Vec<usize>> = vec![Vec::new(); index.len()];
    for (i, c) in clauses.iter().enumerate() {
        for &(_, head) in &c.heads {
            if !defined_by[head].contains(&i) {
                defined_by[head].push(i);
            }
        }
    }

    let mut graph = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..clauses.len()).map(|i| graph.add_node(i)).collect();
    let mut self_loop = vec![false; clauses.len()];
    for (i, c) in clauses.iter().enumerate() {
        for &(atom, _) in &c.body {
            for &j in &defined_by[atom] {
                graph.update_edge(nodes[j], nodes[i], ());
                self_loop[i] |= i == j;
            }
        }
    }

    // Tarjan's algorithm yields components in reverse topological order.
    let mut components = tarjan_scc(&graph);
    components.reverse();
    let mut unit_of = vec![0; clauses.len()];
    let mut units = Vec::with_capacity(components.len());
    for (u, component) in components.iter().enumerate() {
        let mut members: Vec<usize> = component.iter().map(|&n| graph[n]).collect();
        members.sort_unstable();
        for &c in &members {
            unit_of[c] = u;
        }
        let recursive = members.len() > 1 || self_loop[members[0]];
        units.push(Unit {
            clauses: members,
            recursive,
        });
    }
    for unit in units.iter().filter(|u| u.recursive) {
        for &c in &unit.clauses {
            for &(atom, negated) in &clauses[c].body {
                let inside = defined_by[atom].iter().any(|&d| unit_of[d] == unit_of[c]);
                if negated && inside {
                    return Err(ProblogError::UnstratifiedNegation(format!(
                        "`{}` is negated inside its own recursive definition",
                        program.clauses[c]
                            .body
                            .iter()
                            .find(|l| index[&l.atom] == atom)
                            .expect("present")
                            .atom
                    )));
                }
            }
        }
    }

    // Evidence on an atom is checked as soon as its last defining unit has
    // been visited; atoms with no clauses are false throughout.
    let mut checks = vec![Vec::new(); units.len()];
    for e in &program.evidence {
        let atom = index[&e.atom];
        match defined_by[atom].iter().map(|&c| unit_of[c]).max() {
            Some(u) => checks[u].push((atom, e.value)),
            None if e.value => return Err(InferenceError::ZeroProbabilityEvidence.into()),
            None => {}
        }
    }

    let queries: Vec<usize> = program.queries.iter().map(|q| index[q]).collect();
    let mut search = Search {
        clauses: &clauses,
        units: &units,
        checks: &checks,
        queries: &queries,
        truth: vec![false; index.len()],
        evidence_mass: 0.0,
        query_mass: vec![0.0; queries.len()],
        worlds: 0,
        limit,
    };
    search.walk(0, 1.0)?;
    if search.evidence_mass <= 0.0 {
        return Err(InferenceError::ZeroProbabilityEvidence.into());
    }
    Ok(program
        .queries
        .iter()
        .zip(&search.query_mass)
        .map(|(q, &m)| (q.clone(), (m / search.evidence_mass).clamp(0.0, 1.0)))
        .collect())
}
