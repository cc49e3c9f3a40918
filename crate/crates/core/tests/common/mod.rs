#![allow(dead_code)]

use bayesqa::inference::{marginal, Assignment};
use bayesqa::problog::CompiledProgram;
use bayesqa::synth::{random_network, RandomNetworkConfig};
use bayesqa::BayesianNetwork;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

pub fn network_from_seed(seed: u64) -> (BayesianNetwork, ChaCha20Rng) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let net = random_network(&mut rng, &RandomNetworkConfig::default());
    (net, rng)
}

/// A query on one variable and evidence on up to `n - 1` others, with the
/// evidence having positive probability. `None` if no such draw was found.
pub fn random_query<R: Rng>(net: &BayesianNetwork, rng: &mut R) -> Option<(Assignment, Assignment)> {
    for _ in 0..20 {
        let mut order: Vec<usize> = (0..net.len()).collect();
        order.shuffle(rng);
        let q = &net.variables[order[0]];
        let query = Assignment::single(&q.id, &q.states[rng.gen_range(0..q.cardinality())]);
        let k = rng.gen_range(0..net.len());
        let mut evidence = Assignment::new();
        for &v in &order[1..=k] {
            let var = &net.variables[v];
            evidence = evidence.with(&var.id, &var.states[rng.gen_range(0..var.cardinality())]);
        }
        if marginal(net, &evidence).unwrap() > 0.0 {
            return Some((query, evidence));
        }
    }
    None
}

/// Rewrites a binding of `original` into the network recovered from its
/// ProbLog program.
pub fn recovered_binding(
    original: &BayesianNetwork,
    compiled: &CompiledProgram,
    entity: &str,
    var: &str,
    state: &str,
) -> (String, String) {
    let v = original.variable(var).unwrap();
    let s = v.state_index(state).unwrap();
    let atom = if v.is_binary() {
        bayesqa::problog::Atom::new(var, &[entity])
    } else {
        bayesqa::problog::Atom::new(var, &[entity, state])
    };
    let target = compiled.resolve(&atom).unwrap();
    if v.is_binary() && s == 1 {
        let rv = compiled.network.variable(&target.variable).unwrap();
        assert!(rv.is_binary());
        let other = rv.states.iter().find(|x| **x != target.state).unwrap();
        (target.variable.clone(), other.clone())
    } else {
        (target.variable.clone(), target.state.clone())
    }
}

pub fn translate(
    original: &BayesianNetwork,
    compiled: &CompiledProgram,
    entity: &str,
    assignment: &Assignment,
) -> Assignment {
    let mut out = Assignment::new();
    for (var, state) in assignment.iter() {
        let (v, s) = recovered_binding(original, compiled, entity, var, state);
        out = out.with(v, s);
    }
    out
}
