//! Conversion between networks and programs of the BN fragment.
//!
//! A binary variable `v` becomes the atom `v(entity)`, true exactly when `v`
//! takes its first-listed state. A variable with more states becomes one atom
//! `v(entity, state)` per state, tied together by an annotated disjunction
//! per CPT row.

use std::collections::{BTreeSet, HashMap};

use crate::inference::{elimination, restrict, Assignment, CompiledNetwork};
use crate::model::{state_product, topological_order, BayesianNetwork, Cpt, CptRow, RandomVariable};

use super::{
    is_identifier, is_reserved, Atom, Clause, Evidence, Literal, ProbHead, ProblogError, ProblogProgram,
    Term, HEAD_SUM_TOLERANCE,
};

/// The network state an atom stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateRef {
    pub variable: String,
    pub state: String,
}

/// A program compiled to a network, with every defined atom resolved.
#[derive(Debug, Clone)]
pub struct CompiledProgram {
    pub network: BayesianNetwork,
    pub atoms: HashMap<Atom, StateRef>,
}

impl CompiledProgram {
    pub fn resolve(&self, atom: &Atom) -> Result<&StateRef, ProblogError> {
        self.atoms
            .get(atom)
            .ok_or_else(|| ProblogError::UnknownClause(atom.compact()))
    }
}

fn state_atom(var: &RandomVariable, entity: &str, state: usize) -> Atom {
    if var.is_binary() {
        Atom::new(var.id.clone(), &[entity])
    } else {
        Atom::new(var.id.clone(), &[entity, &var.states[state]])
    }
}

/// Literal that holds exactly when `var` is in `state`.
fn state_literal(var: &RandomVariable, entity: &str, state: usize) -> Literal {
    let atom = state_atom(var, entity, state);
    if var.is_binary() && state == 1 {
        Literal::neg(atom)
    } else {
        Literal::pos(atom)
    }
}

fn check_names(network: &BayesianNetwork, entity: &str) -> Result<(), ProblogError> {
    if entity.is_empty() {
        return Err(ProblogError::InvalidName("the entity constant is empty".into()));
    }
    for var in &network.variables {
        if !is_identifier(&var.id) || is_reserved(&var.id) {
            return Err(ProblogError::InvalidName(format!(
                "variable id `{}` is not usable as a predicate name",
                var.id
            )));
        }
        if let Some(s) = var.states.iter().find(|s| s.is_empty()) {
            return Err(ProblogError::InvalidName(format!(
                "variable `{}` has an unrepresentable state `{s}`",
                var.id
            )));
        }
    }
    Ok(())
}

/// The clauses defining `network`, in topological order and CPT row order.
pub fn bn_to_problog(network: &BayesianNetwork, entity: &str) -> Result<ProblogProgram, ProblogError> {
    network.ensure_valid()?;
    check_names(network, entity)?;
    let canonical = network.canonical()?;
    let mut clauses = Vec::with_capacity(canonical.row_count());
    for id in topological_order(&canonical)? {
        let var = canonical.variable(&id).expect("validated");
        let cpt = canonical.cpt(&id).expect("validated");
        let parents: Vec<&RandomVariable> = cpt
            .parents
            .iter()
            .map(|p| canonical.variable(p).expect("validated"))
            .collect();
        for row in &cpt.rows {
            let body = parents
                .iter()
                .zip(&row.given)
                .map(|(p, s)| state_literal(p, entity, p.state_index(s).expect("validated")))
                .collect();
            let heads = if var.is_binary() {
                vec![ProbHead::new(row.distribution[0], state_atom(var, entity, 0))]
            } else {
                row.distribution
                    .iter()
                    .enumerate()
                    .map(|(s, &p)| ProbHead::new(p, state_atom(var, entity, s)))
                    .collect()
            };
            clauses.push(Clause { heads, body });
        }
    }
    Ok(ProblogProgram {
        clauses,
        ..ProblogProgram::default()
    })
}

/// A full program asking `P(query | evidence)` about `network`.
///
/// A query on the second state of a binary variable has no atom of its own,
/// so it is routed through an auxiliary predicate defined as its negation.
pub fn query_program(
    network: &BayesianNetwork,
    entity: &str,
    query: &Assignment,
    evidence: &Assignment,
) -> Result<ProblogProgram, ProblogError> {
    let mut program = bn_to_problog(network, entity)?;
    for (id, state) in evidence.iter() {
        let var = network.require_variable(id)?;
        let s = state_index(var, state)?;
        let value = !(var.is_binary() && s == 1);
        program.evidence.push(Evidence {
            atom: state_atom(var, entity, s),
            value,
        });
    }
    for (id, state) in query.iter() {
        let var = network.require_variable(id)?;
        let s = state_index(var, state)?;
        let atom = state_atom(var, entity, s);
        if var.is_binary() && s == 1 {
            let aux = Atom::new(auxiliary_name(network, &var.id, state), &[entity]);
            program.clauses.push(Clause {
                heads: vec![ProbHead::new(1.0, aux.clone())],
                body: vec![Literal::neg(atom.clone())],
            });
            program.clauses.push(Clause {
                heads: vec![ProbHead::new(0.0, aux.clone())],
                body: vec![Literal::pos(atom)],
            });
            program.queries.push(aux);
        } else {
            program.queries.push(atom);
        }
    }
    Ok(program)
}

fn state_index(var: &RandomVariable, state: &str) -> Result<usize, ProblogError> {
    var.state_index(state).ok_or_else(|| {
        crate::model::ModelError::UnknownState {
            variable: var.id.clone(),
            state: state.to_string(),
        }
        .into()
    })
}

fn sanitize(text: &str) -> String {
    let mut out: String = text
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect();
    if !out.starts_with(|c: char| c.is_ascii_lowercase()) {
        out.insert(0, 'x');
    }
    out
}

fn auxiliary_name(network: &BayesianNetwork, id: &str, state: &str) -> String {
    let base = format!("{id}_{}", sanitize(state));
    let mut name = base.clone();
    let mut k = 1;
    while network.variable(&name).is_some() {
        name = format!("{base}_{k}");
        k += 1;
    }
    name
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut y = x;
        while self.0[y] != root {
            let next = self.0[y];
            self.0[y] = root;
            y = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// One network variable reconstructed from a group of atoms.
struct Group {
    atoms: Vec<usize>,
    clauses: Vec<usize>,
    id: String,
    states: Vec<String>,
}

/// Rebuilds a network from a program in the BN fragment.
///
/// Atoms that share a clause as heads form one variable. A lone atom is a
/// binary variable with states `yes` (atom true) and `no`; a group of atoms
/// is a variable with one state per atom, plus a `none` state when some row
/// leaves probability mass unassigned. For each variable, the clause bodies
/// must partition the states of the parents they mention.
pub fn problog_to_bn(program: &ProblogProgram) -> Result<CompiledProgram, ProblogError> {
    program.validate()?;
    for clause in &program.clauses {
        let atoms = clause
            .heads
            .iter()
            .map(|h| &h.atom)
            .chain(clause.body.iter().map(|l| &l.atom));
        for atom in atoms {
            if !atom.is_ground() {
                return Err(ProblogError::UnsupportedFragment(format!(
                    "`{atom}` is not ground"
                )));
            }
        }
    }

    let mut atom_ids: HashMap<&Atom, usize> = HashMap::new();
    let mut atoms: Vec<&Atom> = Vec::new();
    for clause in &program.clauses {
        for head in &clause.heads {
            atom_ids.entry(&head.atom).or_insert_with(|| {
                atoms.push(&head.atom);
                atoms.len() - 1
            });
        }
    }
    let mut uf = UnionFind((0..atoms.len()).collect());
    for clause in &program.clauses {
        let first = atom_ids[&clause.heads[0].atom];
        for head in &clause.heads[1..] {
            uf.union(first, atom_ids[&head.atom]);
        }
    }

    let mut group_of_root: HashMap<usize, usize> = HashMap::new();
    let mut groups: Vec<Group> = Vec::new();
    let mut group_of_atom = vec![0; atoms.len()];
    for (a, slot) in group_of_atom.iter_mut().enumerate() {
        let root = uf.find(a);
        let g = *group_of_root.entry(root).or_insert_with(|| {
            groups.push(Group {
                atoms: Vec::new(),
                clauses: Vec::new(),
                id: String::new(),
                states: Vec::new(),
            });
            groups.len() - 1
        });
        groups[g].atoms.push(a);
        *slot = g;
    }
    for (c, clause) in program.clauses.iter().enumerate() {
        let g = group_of_atom[atom_ids[&clause.heads[0].atom]];
        groups[g].clauses.push(c);
    }

    name_groups(&mut groups, &atoms, program);

    // Position of each atom within its group's states.
    let mut state_of_atom = vec![0; atoms.len()];
    for g in &groups {
        for (i, &a) in g.atoms.iter().enumerate() {
            state_of_atom[a] = i;
        }
    }

    // States allowed by a body literal, as (group, allowed-state flags).
    let literal_states = |lit: &Literal| -> Result<(usize, Vec<bool>), ProblogError> {
        let &a = atom_ids
            .get(&lit.atom)
            .ok_or_else(|| ProblogError::UnknownClause(lit.atom.compact()))?;
        let g = group_of_atom[a];
        let card = groups[g].states.len();
        let mut allowed = vec![lit.negated; card];
        allowed[state_of_atom[a]] = !lit.negated;
        Ok((g, allowed))
    };

    let mut parents_of: Vec<Vec<usize>> = vec![Vec::new(); groups.len()];
    for (g, group) in groups.iter().enumerate() {
        for &c in &group.clauses {
            for lit in &program.clauses[c].body {
                let (p, _) = literal_states(lit)?;
                if p == g {
                    return Err(ProblogError::UnsupportedFragment(format!(
                        "`{}` depends on itself",
                        lit.atom
                    )));
                }
                if !parents_of[g].contains(&p) {
                    parents_of[g].push(p);
                }
            }
        }
    }

    let variables: Vec<RandomVariable> = groups
        .iter()
        .map(|g| RandomVariable {
            id: g.id.clone(),
            name: g.id.clone(),
            states: g.states.clone(),
        })
        .collect();

    let mut cpts = Vec::with_capacity(groups.len());
    for (g, group) in groups.iter().enumerate() {
        let parents = &parents_of[g];
        let cards: Vec<usize> = parents.iter().map(|&p| groups[p].states.len()).collect();
        let bodies: Vec<Vec<(usize, Vec<bool>)>> = group
            .clauses
            .iter()
            .map(|&c| {
                program.clauses[c]
                    .body
                    .iter()
                    .map(|lit| {
                        let (p, allowed) = literal_states(lit)?;
                        let pos = parents.iter().position(|&x| x == p).expect("collected");
                        Ok((pos, allowed))
                    })
                    .collect::<Result<_, ProblogError>>()
            })
            .collect::<Result<_, _>>()?;

        let mut rows = Vec::new();
        for combo in state_product(&cards) {
            let matching: Vec<usize> = bodies
                .iter()
                .enumerate()
                .filter(|(_, body)| body.iter().all(|(pos, allowed)| allowed[combo[*pos]]))
                .map(|(i, _)| group.clauses[i])
                .collect();
            let describe = || {
                let given: Vec<String> = parents
                    .iter()
                    .zip(&combo)
                    .map(|(&p, &s)| format!("{}={}", groups[p].id, groups[p].states[s]))
                    .collect();
                format!("`{}` given {{{}}}", group.id, given.join(", "))
            };
            let clause = match matching.as_slice() {
                [c] => &program.clauses[*c],
                [] => {
                    return Err(ProblogError::UnsupportedFragment(format!(
                        "no clause defines {}",
                        describe()
                    )))
                }
                _ => {
                    return Err(ProblogError::UnsupportedFragment(format!(
                        "clauses {:?} overlap for {}",
                        matching,
                        describe()
                    )))
                }
            };
            let mut distribution = vec![0.0; group.states.len()];
            for head in &clause.heads {
                distribution[state_of_atom[atom_ids[&head.atom]]] += head.probability;
            }
            let assigned: f64 = distribution.iter().take(group.atoms.len()).sum();
            let rest = (1.0 - assigned).max(0.0);
            if group.states.len() > group.atoms.len() {
                distribution[group.atoms.len()] = rest;
            }
            rows.push(CptRow {
                given: parents
                    .iter()
                    .zip(&combo)
                    .map(|(&p, &s)| groups[p].states[s].clone())
                    .collect(),
                distribution,
            });
        }
        cpts.push(Cpt {
            variable: group.id.clone(),
            parents: parents.iter().map(|&p| groups[p].id.clone()).collect(),
            rows,
        });
    }

    let network = BayesianNetwork::new("program", variables, cpts);
    if let Err(e) = topological_order(&network) {
        return Err(match e {
            crate::model::ModelError::Cycle(vars) => {
                ProblogError::UnsupportedFragment(format!("cyclic dependency among {}", vars.join(", ")))
            }
            other => other.into(),
        });
    }
    network.ensure_valid()?;

    let mut resolved = HashMap::with_capacity(atoms.len());
    for (a, atom) in atoms.iter().enumerate() {
        let g = &groups[group_of_atom[a]];
        resolved.insert(
            (*atom).clone(),
            StateRef {
                variable: g.id.clone(),
                state: g.states[state_of_atom[a]].clone(),
            },
        );
    }
    Ok(CompiledProgram {
        network,
        atoms: resolved,
    })
}

/// Picks variable ids and state names for each group.
fn name_groups(groups: &mut [Group], atoms: &[&Atom], program: &ProblogProgram) {
    let mut taken: BTreeSet<String> = BTreeSet::new();
    let mut predicate_count: HashMap<&str, usize> = HashMap::new();
    for g in groups.iter() {
        let mut preds: Vec<&str> = g.atoms.iter().map(|&a| atoms[a].predicate.as_str()).collect();
        preds.dedup();
        for p in preds {
            *predicate_count.entry(p).or_default() += 1;
        }
    }

    for g in groups.iter_mut() {
        let first = atoms[g.atoms[0]];
        let shared = g.atoms.iter().all(|&a| {
            let atom = atoms[a];
            atom.predicate == first.predicate
                && atom.args.len() == first.args.len()
                && !atom.args.is_empty()
                && atom.args[..atom.args.len() - 1] == first.args[..first.args.len() - 1]
        });

        let base = if predicate_count[first.predicate.as_str()] == 1 && (shared || g.atoms.len() == 1) {
            first.predicate.clone()
        } else if g.atoms.len() == 1 {
            sanitize(&first.compact())
        } else if shared {
            let prefix = Atom {
                predicate: first.predicate.clone(),
                args: first.args[..first.args.len() - 1].to_vec(),
            };
            sanitize(&prefix.compact())
        } else {
            sanitize(&first.compact())
        };
        let mut id = base.clone();
        let mut k = 1;
        while taken.contains(&id) {
            id = format!("{base}_{k}");
            k += 1;
        }
        taken.insert(id.clone());
        g.id = id;

        g.states = if g.atoms.len() == 1 {
            vec!["yes".into(), "no".into()]
        } else if shared {
            g.atoms
                .iter()
                .map(|&a| match atoms[a].args.last() {
                    Some(Term::Const(c) | Term::Var(c)) => c.clone(),
                    None => unreachable!("shared groups have arguments"),
                })
                .collect()
        } else {
            g.atoms.iter().map(|&a| atoms[a].compact()).collect()
        };
        let mut seen = BTreeSet::new();
        for s in &mut g.states {
            let base = s.clone();
            let mut k = 1;
            while !seen.insert(s.clone()) {
                *s = format!("{base}_{k}");
                k += 1;
            }
        }

        if g.atoms.len() > 1 {
            let residual = g
                .clauses
                .iter()
                .any(|&c| program.clauses[c].head_sum() < 1.0 - HEAD_SUM_TOLERANCE);
            if residual {
                let mut none = String::from("none");
                while g.states.contains(&none) {
                    none.insert(0, '_');
                }
                g.states.push(none);
            }
        }
    }
}

/// Answers every query of `program`, in query order, by compiling it to a
/// network and running variable elimination.
///
/// Evidence `false` on an atom conditions on its variable taking any other
/// state.
pub fn evaluate(program: &ProblogProgram) -> Result<Vec<(Atom, f64)>, ProblogError> {
    if program.queries.is_empty() {
        return Err(ProblogError::NoQueries);
    }
    let compiled = problog_to_bn(program)?;
    let net = CompiledNetwork::new(&compiled.network)?;
    let mut mask = net.empty_mask();
    for e in &program.evidence {
        let r = compiled.resolve(&e.atom)?;
        let v = net.var_index(&r.variable)?;
        let s = net.state_index(v, &r.state)?;
        let states: Vec<usize> = if e.value {
            vec![s]
        } else {
            (0..net.cards[v]).filter(|&x| x != s).collect()
        };
        restrict(&mut mask, v, net.cards[v], &states);
    }
    program
        .queries
        .iter()
        .map(|q| {
            let r = compiled.resolve(q)?;
            let v = net.var_index(&r.variable)?;
            let s = net.state_index(v, &r.state)?;
            let p = elimination::conditional(&net, v, &[s], &mask)?;
            Ok((q.clone(), p))
        })
        .collect()
}
