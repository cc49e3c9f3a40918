//! Extraction of self-contained subnetworks.
//!
//! Removed variables are summed out. A kept variable that loses parents gets
//! a CPT conditioned only on its kept parents, computed by exact inference on
//! the full network. This is exact as long as removed variables have no kept
//! ancestors and no removed ancestor feeds two kept variables; otherwise the
//! induced dependence is dropped and a warning says where.

use std::collections::{BTreeSet, HashMap};

use crate::inference::{elimination, CompiledNetwork, InferenceError};
use crate::model::{state_product, topological_order, BayesianNetwork, Cpt, CptRow};

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetOutcome {
    pub network: BayesianNetwork,
    pub warnings: Vec<String>,
}

/// Subnetwork over `keep`. See [`subset_with_diagnostics`].
pub fn subset<S: AsRef<str>>(
    network: &BayesianNetwork,
    keep: &[S],
) -> Result<BayesianNetwork, InferenceError> {
    Ok(subset_with_diagnostics(network, keep)?.network)
}

/// Subnetwork over `keep`, with warnings for every place where the result
/// is an approximation of the original marginal.
pub fn subset_with_diagnostics<S: AsRef<str>>(
    network: &BayesianNetwork,
    keep: &[S],
) -> Result<SubsetOutcome, InferenceError> {
    let compiled = CompiledNetwork::new(network)?;
    if keep.is_empty() {
        return Err(InferenceError::InvalidQuery("the kept set is empty".into()));
    }
    let mut kept: BTreeSet<&str> = BTreeSet::new();
    for id in keep {
        kept.insert(network.require_variable(id.as_ref())?.id.as_str());
    }

    let mut warnings = Vec::new();
    let mut cpts = Vec::with_capacity(kept.len());
    let mut removed_ancestry: HashMap<&str, BTreeSet<&str>> = HashMap::new();

    for id in topological_order(network)? {
        if !kept.contains(id.as_str()) {
            continue;
        }
        let cpt = network.cpt(&id).expect("validated");
        if cpt.parents.iter().all(|p| kept.contains(p.as_str())) {
            cpts.push(cpt.clone());
            continue;
        }
        let kept_parents: Vec<&str> = cpt
            .parents
            .iter()
            .map(String::as_str)
            .filter(|p| kept.contains(p))
            .collect();
        cpts.push(conditional_cpt(&compiled, &id, &kept_parents, &mut warnings)?);

        let ancestry = removed_only_ancestors(network, &id, &kept);
        for r in &ancestry {
            let bypass: Vec<&str> = direct_parents(network, r).filter(|p| kept.contains(p)).collect();
            if !bypass.is_empty() {
                warnings.push(format!(
                    "removed variable `{r}` links kept {} to `{id}`; that dependence is dropped",
                    quote_list(&bypass)
                ));
            }
        }
        removed_ancestry.insert(network.require_variable(&id)?.id.as_str(), ancestry);
    }

    let boundary: Vec<&str> = {
        let mut b: Vec<&str> = removed_ancestry.keys().copied().collect();
        b.sort_unstable();
        b
    };
    let mut shared: BTreeSet<&str> = BTreeSet::new();
    for (i, a) in boundary.iter().enumerate() {
        for b in &boundary[i + 1..] {
            shared.extend(removed_ancestry[a].intersection(&removed_ancestry[b]));
        }
    }
    for r in shared {
        let feeds: Vec<&str> = boundary
            .iter()
            .copied()
            .filter(|v| removed_ancestry[v].contains(r))
            .collect();
        warnings.push(format!(
            "removed ancestor `{r}` is shared by {}; their dependence is dropped",
            quote_list(&feeds)
        ));
    }

    let variables = network
        .variables
        .iter()
        .filter(|v| kept.contains(v.id.as_str()))
        .cloned()
        .collect();
    let mut result = BayesianNetwork::new(network.name.clone(), variables, cpts);
    result.source = network.source.clone();
    result.ensure_valid()?;
    Ok(SubsetOutcome {
        network: result,
        warnings,
    })
}

/// Distribution of each state of `var`, summed over all other variables.
/// For a root this is its CPT row as stored.
pub fn marginal_prior(network: &BayesianNetwork, var: &str) -> Result<Vec<f64>, InferenceError> {
    network.require_variable(var)?;
    if let Some(cpt) = network.cpt(var).filter(|c| c.is_root()) {
        network.ensure_valid()?;
        return Ok(cpt.rows[0].distribution.clone());
    }
    let compiled = CompiledNetwork::new(network)?;
    let v = compiled.var_index(var)?;
    elimination::posterior(&compiled, v, &compiled.empty_mask())
}

fn quote_list(items: &[&str]) -> String {
    items
        .iter()
        .map(|s| format!("`{s}`"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn direct_parents<'a>(network: &'a BayesianNetwork, var: &str) -> impl Iterator<Item = &'a str> {
    network
        .cpt(var)
        .into_iter()
        .flat_map(|c| c.parents.iter().map(String::as_str))
}

/// Removed variables reachable from `var` by walking up through removed
/// variables only.
fn removed_only_ancestors<'a>(
    network: &'a BayesianNetwork,
    var: &str,
    kept: &BTreeSet<&str>,
) -> BTreeSet<&'a str> {
    let mut seen = BTreeSet::new();
    let mut stack: Vec<&str> = direct_parents(network, var)
        .filter(|p| !kept.contains(p))
        .collect();
    while let Some(r) = stack.pop() {
        if seen.insert(r) {
            stack.extend(direct_parents(network, r).filter(|p| !kept.contains(p)));
        }
    }
    seen
}

/// `P(var | kept_parents)` on the original network, one row per kept-parent
/// assignment. Assignments of probability zero get a uniform row.
fn conditional_cpt(
    compiled: &CompiledNetwork<'_>,
    var: &str,
    kept_parents: &[&str],
    warnings: &mut Vec<String>,
) -> Result<Cpt, InferenceError> {
    let v = compiled.var_index(var)?;
    let parent_idx: Vec<usize> = kept_parents
        .iter()
        .map(|p| compiled.var_index(p))
        .collect::<Result<_, _>>()?;
    let cards: Vec<usize> = parent_idx.iter().map(|&p| compiled.cards[p]).collect();
    let mut rows = Vec::new();
    for combo in state_product(&cards) {
        let mut mask = compiled.empty_mask();
        for (&p, &s) in parent_idx.iter().zip(&combo) {
            crate::inference::restrict(&mut mask, p, compiled.cards[p], &[s]);
        }
        let given: Vec<String> = parent_idx
            .iter()
            .zip(&combo)
            .map(|(&p, &s)| compiled.network.variables[p].states[s].clone())
            .collect();
        let distribution = match elimination::posterior(compiled, v, &mask) {
            Ok(d) => d,
            Err(InferenceError::ZeroProbabilityEvidence) => {
                warnings.push(format!(
                    "parent assignment {{{}}} of `{var}` has probability zero; using a uniform row",
                    kept_parents
                        .iter()
                        .zip(&given)
                        .map(|(p, s)| format!("{p}={s}"))
                        .collect::<Vec<_>>()
                        .join(", ")
                ));
                vec![1.0 / compiled.cards[v] as f64; compiled.cards[v]]
            }
            Err(e) => return Err(e),
        };
        rows.push(CptRow { given, distribution });
    }
    Ok(Cpt {
        variable: var.to_string(),
        parents: kept_parents.iter().map(|p| p.to_string()).collect(),
        rows,
    })
}
