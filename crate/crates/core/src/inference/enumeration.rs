//! Brute-force inference: walks every world in topological order, multiplying
//! CPT entries as each variable is assigned.

use super::{clamp_probability, intersect, ratio, CompiledNetwork, InferenceError, StateMask};

/// Total probability of the worlds allowed by `mask`.
pub fn mass(net: &CompiledNetwork<'_>, mask: &StateMask) -> f64 {
    let mut world = vec![0usize; net.variables.len()];
    let mut total = 0.0;
    walk(net, mask, 0, 1.0, &mut world, &mut |_, p| total += p);
    total
}

/// `P(query | evidence)` where both are given as state masks. The query mask
/// may constrain variables that the evidence also constrains.
pub fn conditional(
    net: &CompiledNetwork<'_>,
    query: &StateMask,
    evidence: &StateMask,
) -> Result<f64, InferenceError> {
    let both = intersect(query, evidence);
    let mut world = vec![0usize; net.variables.len()];
    let mut evidence_mass = 0.0;
    let mut joint_mass = 0.0;
    walk(net, evidence, 0, 1.0, &mut world, &mut |w, p| {
        evidence_mass += p;
        if allowed(&both, w) {
            joint_mass += p;
        }
    });
    ratio(clamp_probability(joint_mass)?, evidence_mass)
}

fn allowed(mask: &StateMask, world: &[usize]) -> bool {
    mask.iter()
        .zip(world)
        .all(|(m, &s)| m.as_ref().is_none_or(|m| m[s]))
}

fn walk(
    net: &CompiledNetwork<'_>,
    mask: &StateMask,
    depth: usize,
    weight: f64,
    world: &mut [usize],
    visit: &mut dyn FnMut(&[usize], f64),
) {
    if depth == net.order.len() {
        visit(world, weight);
        return;
    }
    let v = net.order[depth];
    let var = &net.variables[v];
    for s in 0..var.card {
        if let Some(m) = &mask[v] {
            if !m[s] {
                continue;
            }
        }
        world[v] = s;
        let p = var.entry(world, &net.cards, s);
        walk(net, mask, depth + 1, weight * p, world, visit);
    }
}
