//! Size statistics over networks and generated instances.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::BayesianNetwork;

use super::{DatasetError, DatasetInstance};

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        if values.is_empty() {
            return Summary { mean: 0.0, std: 0.0 };
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        Summary {
            mean,
            std: var.sqrt(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetStats {
    pub networks: usize,
    pub variables_per_network: Summary,
    /// Pooled over every variable of every network.
    pub states_per_variable: Summary,
    /// Premises of one kind; each network has as many of each kind.
    pub premises_per_network: Summary,
    pub numeric_premises: usize,
    pub wep_premises: usize,
    pub instances: usize,
    pub evidence_statements: usize,
    pub queries: usize,
    /// Instance counts per primary reasoning label, `none` included.
    pub primary_types: BTreeMap<String, usize>,
}

pub fn dataset_stats(
    networks: &[&BayesianNetwork],
    instances: &[DatasetInstance],
) -> Result<DatasetStats, DatasetError> {
    if networks.is_empty() {
        return Err(DatasetError::NoNetworks);
    }
    let variables: Vec<f64> = networks.iter().map(|n| n.len() as f64).collect();
    let states: Vec<f64> = networks
        .iter()
        .flat_map(|n| n.variables.iter().map(|v| v.cardinality() as f64))
        .collect();
    let premises: Vec<f64> = networks.iter().map(|n| n.row_count() as f64).collect();
    let per_kind: usize = networks.iter().map(|n| n.row_count()).sum();

    let mut primary_types: BTreeMap<String, usize> = BTreeMap::new();
    for name in ["causal", "evidential", "explaining_away", "none"] {
        primary_types.insert(name.to_string(), 0);
    }
    for inst in instances {
        let key = inst.primary_type.map_or("none", |t| t.as_str());
        *primary_types.get_mut(key).expect("seeded") += 1;
    }

    Ok(DatasetStats {
        networks: networks.len(),
        variables_per_network: Summary::of(&variables),
        states_per_variable: Summary::of(&states),
        premises_per_network: Summary::of(&premises),
        numeric_premises: per_kind,
        wep_premises: per_kind,
        instances: instances.len(),
        evidence_statements: instances.iter().map(|i| i.evidence.len()).sum(),
        queries: instances.len(),
        primary_types,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn gallstone_counts() {
        let net = fixtures::gallstone();
        let s = dataset_stats(&[&net], &[]).unwrap();
        assert_eq!(s.numeric_premises, 5);
        assert_eq!(s.premises_per_network.mean, 5.0);
        assert!((s.states_per_variable.mean - 7.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn single_binary_variable() {
        let net = fixtures::single_binary("coin", 0.5);
        let s = dataset_stats(&[&net], &[]).unwrap();
        assert_eq!(s.states_per_variable, Summary { mean: 2.0, std: 0.0 });
    }

    #[test]
    fn variables_mean_over_networks() {
        assert_eq!(Summary::of(&[3.0, 13.0]).mean, 8.0);
        assert_eq!(Summary::of(&[3.0, 13.0]).std, 5.0);
        let a = fixtures::chain();
        let b = fixtures::five_node();
        let s = dataset_stats(&[&a, &b], &[]).unwrap();
        assert_eq!(s.variables_per_network.mean, 4.0);
    }
}
