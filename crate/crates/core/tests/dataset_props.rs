use bayesqa::dataset::{generate_dataset, GenerateOptions, PremiseKind};
use bayesqa::inference::conditional_query;
use bayesqa::problog::{enumerate_worlds, parse};
use bayesqa::synth::{random_network, RandomNetworkConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(60))]

    #[test]
    fn instances_are_consistent(net_seed in any::<u64>(), seed in any::<u64>()) {
        let config = RandomNetworkConfig { max_variables: 6, ..Default::default() };
        let net = random_network(&mut ChaCha20Rng::seed_from_u64(net_seed), &config);
        let options = GenerateOptions {
            network_id: "net".into(),
            count: 8,
            seed,
            entity: "e".into(),
        };
        let dataset = generate_dataset(&net, &options).unwrap();
        let numeric = dataset.premises.iter().filter(|p| p.kind == PremiseKind::Numeric).count();
        prop_assert_eq!(numeric, net.row_count());
        prop_assert_eq!(dataset.premises.len(), 2 * net.row_count());
        for inst in &dataset.instances {
            let evidence = inst.evidence_assignment();
            prop_assert!(!evidence.is_empty());
            prop_assert!(evidence.len() < net.len());
            prop_assert!(!evidence.contains(&inst.query.variable));
            let oracle = conditional_query(&net, &inst.query_assignment(), &evidence).unwrap().probability;
            prop_assert!((inst.gold - oracle).abs() < 1e-10);
            let worlds = enumerate_worlds(&parse(&inst.program).unwrap()).unwrap();
            prop_assert!((worlds[0].1 - inst.gold).abs() < 1e-10);
        }
    }
}
