mod common;

use bayesqa::fixtures;
use bayesqa::inference::{conditional_query, Assignment};
use bayesqa::model::{state_product, validate};
use bayesqa::subset::subset;
use bayesqa::synth::redraw_cpts;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use common::{network_from_seed, random_query};

const KEPT: [&str; 3] = ["c", "d", "e"];

fn kept_assignments() -> Vec<Assignment> {
    let net = fixtures::five_node();
    let vars: Vec<_> = KEPT.iter().map(|id| net.variable(id).unwrap()).collect();
    let cards: Vec<usize> = vars.iter().map(|v| v.cardinality() + 1).collect();
    // Index `cardinality` stands for "unobserved".
    state_product(&cards)
        .into_iter()
        .map(|combo| {
            combo.iter().zip(&vars).fold(Assignment::new(), |a, (&s, v)| {
                if s == v.cardinality() {
                    a
                } else {
                    a.with(&v.id, &v.states[s])
                }
            })
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn five_node_queries_survive(seed in any::<u64>()) {
        let net = redraw_cpts(&mut ChaCha20Rng::seed_from_u64(seed), &fixtures::five_node());
        let small = subset(&net, &KEPT).unwrap();
        prop_assert!(validate(&small).is_valid());
        let assignments = kept_assignments();
        for query in assignments.iter().filter(|a| a.len() == 1) {
            for evidence in &assignments {
                let (qv, _) = query.iter().next().unwrap();
                if evidence.contains(qv) {
                    continue;
                }
                let full = conditional_query(&net, query, evidence);
                let reduced = conditional_query(&small, query, evidence);
                match (full, reduced) {
                    (Ok(a), Ok(b)) => prop_assert!((a.probability - b.probability).abs() < 1e-10),
                    (Err(_), Err(_)) => {}
                    (a, b) => prop_assert!(false, "{:?} vs {:?}", a, b),
                }
            }
        }
    }

    #[test]
    fn subset_is_idempotent_and_valid(seed in any::<u64>()) {
        let (net, mut rng) = network_from_seed(seed);
        let ids: Vec<String> = net.variable_ids().map(String::from).collect();
        let keep: Vec<&String> = ids.iter().filter(|_| rand::Rng::gen_bool(&mut rng, 0.6)).collect();
        if keep.is_empty() {
            return Ok(());
        }
        let once = subset(&net, &keep).unwrap();
        prop_assert!(validate(&once).is_valid());
        prop_assert_eq!(once.len(), keep.len());
        let twice = subset(&once, &keep).unwrap();
        prop_assert_eq!(&once.canonical().unwrap(), &twice.canonical().unwrap());
    }

    #[test]
    fn removing_only_leaves_changes_nothing(seed in any::<u64>()) {
        let (net, mut rng) = network_from_seed(seed);
        let leaves: Vec<&str> = net
            .variable_ids()
            .filter(|id| net.cpts.iter().all(|c| !c.parents.iter().any(|p| p == id)))
            .collect();
        let keep: Vec<&str> = net.variable_ids().filter(|id| *id != leaves[0]).collect();
        if keep.is_empty() {
            return Ok(());
        }
        let small = subset(&net, &keep).unwrap();
        let Some((query, evidence)) = random_query(&small, &mut rng) else {
            return Ok(());
        };
        let a = conditional_query(&net, &query, &evidence).unwrap().probability;
        let b = conditional_query(&small, &query, &evidence).unwrap().probability;
        prop_assert!((a - b).abs() < 1e-10);
    }
}
