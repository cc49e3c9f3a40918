//! Question-answering instances generated from a network.
//!
//! Each instance pairs the network's premises (one sentence per CPT row, in
//! numeric and in estimative wording) with sampled observations, a question
//! about one unobserved variable, its exact answer and reasoning labels.
//!
//! Generation is deterministic. Instance `i` draws from the ChaCha20 stream
//! `i` of a generator seeded with the run seed; the WEP premises draw from
//! the last stream. Instances can therefore be built in parallel without
//! changing a single output byte.

mod premises;
mod qe;
mod stats;

use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inference::{Assignment, InferenceError};
use crate::model::{BayesianNetwork, ModelError};
use crate::problog::{query_program, serialize, ProblogError};
use crate::wep::WepError;

pub use premises::{format_percent, template_premises, Binding, Premise, PremiseKind};
pub use qe::{
    classify_reasoning, evidence_text, question_text, sample_qe, QePair, ReasoningType, MAX_EVIDENCE_ATTEMPTS,
};
pub use stats::{dataset_stats, DatasetStats, Summary};

pub const DATASET_FORMAT: &str = "bayesqa-dataset/1";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("TooFewVariables: a question needs at least 2 variables, the network has {0}")]
    TooFewVariables(usize),
    #[error("UnsatisfiableEvidence: every evidence draw had probability zero after {attempts} attempts")]
    UnsatisfiableEvidence { attempts: usize },
    #[error("EmptyCount: at least one instance must be requested")]
    EmptyCount,
    #[error("NoNetworks: statistics need at least one network")]
    NoNetworks,
    #[error("instance {index}: {source}")]
    Instance {
        index: usize,
        #[source]
        source: Box<DatasetError>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Problog(#[from] ProblogError),
    #[error(transparent)]
    Wep(#[from] WepError),
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Rewrites template sentences, e.g. into more natural wording. Must be a
/// pure function of its input for generation to stay reproducible.
pub trait TextProvider: Sync {
    fn rewrite(&self, template: &str) -> String;
}

/// Leaves every template unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct Templates;

impl TextProvider for Templates {
    fn rewrite(&self, template: &str) -> String {
        template.to_string()
    }
}

#[derive(Debug, Clone)]
pub struct GenerateOptions {
    pub network_id: String,
    pub count: usize,
    pub seed: u64,
    /// Constant naming the subject in generated ProbLog programs.
    pub entity: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetInstance {
    pub id: String,
    pub network_id: String,
    pub index: usize,
    pub seed: u64,
    /// Both kinds, numeric first; shared by every instance of a network.
    pub premises: Vec<Premise>,
    pub evidence: Vec<Binding>,
    pub evidence_texts: Vec<String>,
    pub query: Binding,
    pub question_text: String,
    pub gold: f64,
    pub reasoning_types: Vec<ReasoningType>,
    pub primary_type: Option<ReasoningType>,
    /// Full ProbLog program for the instance.
    pub program: String,
}

impl DatasetInstance {
    pub fn evidence_assignment(&self) -> Assignment {
        self.evidence
            .iter()
            .map(|b| (b.variable.clone(), b.state.clone()))
            .collect()
    }

    pub fn query_assignment(&self) -> Assignment {
        Assignment::single(&self.query.variable, &self.query.state)
    }
}

/// All instances generated from one network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub network_id: String,
    pub seed: u64,
    pub premises: Vec<Premise>,
    pub instances: Vec<DatasetInstance>,
}

/// The generator for instance `index` of a run seeded with `seed`.
pub fn instance_rng(seed: u64, index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Seed for the `k`-th network of a multi-network run.
pub fn network_seed(seed: u64, k: usize) -> u64 {
    use rand::RngCore;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(u64::MAX - 1);
    rng.set_word_pos(2 * k as u128);
    rng.next_u64()
}

pub fn generate_dataset(
    network: &BayesianNetwork,
    options: &GenerateOptions,
) -> Result<Dataset, DatasetError> {
    generate_dataset_with(network, options, &Templates)
}

pub fn generate_dataset_with(
    network: &BayesianNetwork,
    options: &GenerateOptions,
    text: &dyn TextProvider,
) -> Result<Dataset, DatasetError> {
    if options.count == 0 {
        return Err(DatasetError::EmptyCount);
    }
    network.ensure_valid()?;
    let mut premise_rng = instance_rng(options.seed, u64::MAX);
    let mut premises = template_premises(network, PremiseKind::Numeric, &mut premise_rng)?;
    premises.extend(template_premises(network, PremiseKind::Wep, &mut premise_rng)?);
    for p in &mut premises {
        p.text = text.rewrite(&p.text);
    }

    let width = options.count.to_string().len().max(4);
    let instances = (0..options.count)
        .into_par_iter()
        .map(|index| {
            build_instance(network, options, text, &premises, index, width).map_err(|e| {
                DatasetError::Instance {
                    index,
                    source: Box::new(e),
                }
            })
        })
        .collect::<Result<Vec<_>, _>>()?;

    Ok(Dataset {
        network_id: options.network_id.clone(),
        seed: options.seed,
        premises,
        instances,
    })
}

fn build_instance(
    network: &BayesianNetwork,
    options: &GenerateOptions,
    text: &dyn TextProvider,
    premises: &[Premise],
    index: usize,
    width: usize,
) -> Result<DatasetInstance, DatasetError> {
    let mut rng = instance_rng(options.seed, index as u64);
    let qe = sample_qe(network, &mut rng)?;
    let evidence: Assignment = qe
        .evidence
        .iter()
        .map(|b| (b.variable.clone(), b.state.clone()))
        .collect();
    let query = Assignment::single(&qe.query.variable, &qe.query.state);
    let program = serialize(&query_program(network, &options.entity, &query, &evidence)?);
    Ok(DatasetInstance {
        id: format!("{}-{index:0width$}", options.network_id),
        network_id: options.network_id.clone(),
        index,
        seed: options.seed,
        premises: premises.to_vec(),
        evidence_texts: qe.evidence_texts.iter().map(|t| text.rewrite(t)).collect(),
        evidence: qe.evidence,
        query: qe.query,
        question_text: text.rewrite(&qe.question_text),
        gold: qe.gold,
        reasoning_types: qe.reasoning_types,
        primary_type: qe.primary_type,
        program,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    format: String,
    network_id: String,
    seed: u64,
    instances: usize,
    premises: usize,
}

/// Writes `premises.json`, `instances.jsonl`, one `programs/<id>.pl` per
/// instance and a `manifest.json` into `dir`.
pub fn write_dataset(dataset: &Dataset, dir: &Path) -> Result<(), DatasetError> {
    fs::create_dir_all(dir.join("programs"))?;
    let mut premises = serde_json::to_string_pretty(&dataset.premises)?;
    premises.push('\n');
    fs::write(dir.join("premises.json"), premises)?;
    let mut lines = String::new();
    for instance in &dataset.instances {
        lines.push_str(&serde_json::to_string(instance)?);
        lines.push('\n');
        fs::write(
            dir.join("programs").join(format!("{}.pl", instance.id)),
            &instance.program,
        )?;
    }
    fs::write(dir.join("instances.jsonl"), lines)?;
    let manifest = Manifest {
        format: DATASET_FORMAT.to_string(),
        network_id: dataset.network_id.clone(),
        seed: dataset.seed,
        instances: dataset.instances.len(),
        premises: dataset.premises.len(),
    };
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

/// Reads the instances written by [`write_dataset`].
pub fn read_instances(path: &Path) -> Result<Vec<DatasetInstance>, DatasetError> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(DatasetError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::inference::conditional_query;
    use crate::problog::{enumerate_worlds, parse};

    fn options(count: usize, seed: u64) -> GenerateOptions {
        GenerateOptions {
            network_id: "gallstone".into(),
            count,
            seed,
            entity: "patient".into(),
        }
    }

    #[test]
    fn deterministic_and_oracle_checked() {
        let net = fixtures::gallstone();
        let a = generate_dataset(&net, &options(10, 42)).unwrap();
        let b = generate_dataset(&net, &options(10, 42)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.premises.len(), 10);
        assert_eq!(a.instances[3].id, "gallstone-0003");
        for inst in &a.instances {
            let oracle = conditional_query(&net, &inst.query_assignment(), &inst.evidence_assignment())
                .unwrap()
                .probability;
            assert!((inst.gold - oracle).abs() < 1e-10);
            let worlds = enumerate_worlds(&parse(&inst.program).unwrap()).unwrap();
            assert!((worlds[0].1 - oracle).abs() < 1e-10);
        }
    }

    #[test]
    fn count_zero_rejected() {
        assert!(matches!(
            generate_dataset(&fixtures::gallstone(), &options(0, 1)),
            Err(DatasetError::EmptyCount)
        ));
    }

    #[test]
    fn instance_does_not_depend_on_count() {
        let net = fixtures::five_node();
        let small = generate_dataset(&net, &options(5, 9)).unwrap();
        let large = generate_dataset(&net, &options(50, 9)).unwrap();
        for (x, y) in small.instances.iter().zip(&large.instances) {
            assert_eq!(x.evidence, y.evidence);
            assert_eq!(x.query, y.query);
        }
    }

    #[test]
    fn text_provider_is_applied() {
        struct Upper;
        impl TextProvider for Upper {
            fn rewrite(&self, template: &str) -> String {
                template.to_uppercase()
            }
        }
        let d = generate_dataset_with(&fixtures::gallstone(), &options(2, 1), &Upper).unwrap();
        assert!(d.instances[0].question_text.starts_with("WHAT IS"));
        assert!(d.premises[0].text.starts_with("GALLSTONES"));
    }

    #[test]
    fn network_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..10).map(|k| network_seed(7, k)).collect();
        assert_eq!(seeds.len(), 10);
        assert_eq!(network_seed(7, 3), network_seed(7, 3));
    }

    #[test]
    fn write_and_read_back() {
        let dir = tempfile::tempdir().unwrap();
        let d = generate_dataset(&fixtures::gallstone(), &options(3, 5)).unwrap();
        write_dataset(&d, dir.path()).unwrap();
        let back = read_instances(&dir.path().join("instances.jsonl")).unwrap();
        assert_eq!(back, d.instances);
        let program = std::fs::read_to_string(dir.path().join("programs/gallstone-0001.pl")).unwrap();
        assert_eq!(program, d.instances[1].program);
        assert!(dir.path().join("manifest.json").exists());
    }
}
