//! Seeded random networks for property tests and benchmarks.
//!
//! Probabilities are multiples of 1e-4 that sum to exactly one in integer
//! units, so every value survives a trip through four-decimal text.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::{state_product, BayesianNetwork, Cpt, CptRow, RandomVariable};

#[derive(Debug, Clone, Copy)]
pub struct RandomNetworkConfig {
    pub min_variables: usize,
    pub max_variables: usize,
    pub max_states: usize,
    pub max_parents: usize,
    /// Chance that a row puts all its mass on one state.
    pub deterministic_row_rate: f64,
}

impl Default for RandomNetworkConfig {
    fn default() -> Self {
        RandomNetworkConfig {
            min_variables: 2,
            max_variables: 8,
            max_states: 4,
            max_parents: 3,
            deterministic_row_rate: 0.0,
        }
    }
}

const UNITS: u32 = 10_000;

/// A row of `k` probabilities in units of 1e-4 summing to one.
pub fn random_distribution<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut cuts: Vec<u32> = (0..k - 1).map(|_| rng.gen_range(0..=UNITS)).collect();
    cuts.sort_unstable();
    let mut prev = 0;
    let mut out = Vec::with_capacity(k);
    for c in cuts.into_iter().chain([UNITS]) {
        out.push(f64::from(c - prev) / f64::from(UNITS));
        prev = c;
    }
    out
}

/// Generates a valid network. Variables are named `v0, v1, ...` in a random
/// topological order; binary variables use states `yes`/`no`, larger ones
/// `s0, s1, ...`.
pub fn random_network<R: Rng + ?Sized>(rng: &mut R, config: &RandomNetworkConfig) -> BayesianNetwork {
    let n = rng.gen_range(config.min_variables..=config.max_variables);
    let mut variables = Vec::with_capacity(n);
    for i in 0..n {
        let k = rng.gen_range(2..=config.max_states.max(2));
        let states: Vec<String> = if k == 2 {
            vec!["yes".into(), "no".into()]
        } else {
            (0..k).map(|s| format!("s{s}")).collect()
        };
        variables.push(RandomVariable {
            id: format!("v{i}"),
            name: format!("variable {i}"),
            states,
        });
    }

    let mut cpts = Vec::with_capacity(n);
    for i in 0..n {
        let mut earlier: Vec<usize> = (0..i).collect();
        earlier.shuffle(rng);
        let count = rng.gen_range(0..=config.max_parents.min(i));
        let parents: Vec<usize> = earlier.into_iter().take(count).collect();
        let cards: Vec<usize> = parents.iter().map(|&p| variables[p].states.len()).collect();
        let k = variables[i].states.len();
        let rows = state_product(&cards)
            .into_iter()
            .map(|combo| {
                let distribution = if rng.gen_bool(config.deterministic_row_rate) {
                    let mut d = vec![0.0; k];
                    d[rng.gen_range(0..k)] = 1.0;
                    d
                } else {
                    random_distribution(rng, k)
                };
                CptRow {
                    given: combo
                        .iter()
                        .zip(&parents)
                        .map(|(&s, &p)| variables[p].states[s].clone())
                        .collect(),
                    distribution,
                }
            })
            .collect();
        cpts.push(Cpt {
            variable: variables[i].id.clone(),
            parents: parents.iter().map(|&p| variables[p].id.clone()).collect(),
            rows,
        });
    }
    BayesianNetwork::new("random", variables, cpts).with_source("synthetic")
}

/// Same structure as `template` with freshly drawn CPT entries.
pub fn redraw_cpts<R: Rng + ?Sized>(rng: &mut R, template: &BayesianNetwork) -> BayesianNetwork {
    let mut net = template.clone();
    for cpt in &mut net.cpts {
        for row in &mut cpt.rows {
            row.distribution = random_distribution(rng, row.distribution.len());
        }
    }
    net
}
