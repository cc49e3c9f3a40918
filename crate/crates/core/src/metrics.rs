//! Scoring of probability predictions against gold answers.
//!
//! A prediction is either a value in `[0, 1]` or an error (no usable
//! answer). Values are correct within a relative tolerance of 1e-4. Two RMSE
//! variants are reported: one that substitutes 0.5 for errors, and one over
//! the valid predictions only.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{DatasetInstance, PremiseKind, ReasoningType};

pub const RELATIVE_TOLERANCE: f64 = 1e-4;
pub const ABSOLUTE_FLOOR: f64 = 1e-9;
/// Substituted for error outcomes in [`Metrics::rmse_50`].
pub const FALLBACK: f64 = 0.5;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("DuplicatePrediction: instance `{0}` has more than one prediction")]
    DuplicatePrediction(String),
    #[error("DuplicateInstance: instance id `{0}` appears more than once")]
    DuplicateInstance(String),
    #[error("UnknownInstance: prediction for unknown instance `{0}`")]
    UnknownInstance(String),
    #[error("MissingPrediction: no prediction for instance `{0}`")]
    MissingPrediction(String),
    #[error("InvalidPrediction: line {line}: {message}")]
    InvalidPrediction { line: usize, message: String },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Value(f64),
    Error(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub id: String,
    pub outcome: Outcome,
}

impl Prediction {
    pub fn value(id: impl Into<String>, value: f64) -> Self {
        Prediction {
            id: id.into(),
            outcome: Outcome::Value(value),
        }
    }

    pub fn error(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Prediction {
            id: id.into(),
            outcome: Outcome::Error(reason.into()),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct PredictionLine {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

/// Parses prediction JSON lines: `{"id": ..., "value": p}` or
/// `{"id": ..., "error": reason}`.
pub fn parse_predictions(text: &str) -> Result<Vec<Prediction>, MetricsError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let invalid = |message: String| MetricsError::InvalidPrediction { line: i + 1, message };
        let raw: PredictionLine = serde_json::from_str(line).map_err(|e| invalid(e.to_string()))?;
        let outcome = match (raw.value, raw.error) {
            (Some(v), None) if (0.0..=1.0).contains(&v) => Outcome::Value(v),
            (Some(v), None) => return Err(invalid(format!("value {v} is outside [0, 1]"))),
            (None, Some(reason)) => Outcome::Error(reason),
            _ => return Err(invalid("expected exactly one of `value` and `error`".into())),
        };
        out.push(Prediction { id: raw.id, outcome });
    }
    Ok(out)
}

/// Inverse of [`parse_predictions`].
pub fn format_predictions(predictions: &[Prediction]) -> String {
    let mut text = String::new();
    for p in predictions {
        let line = match &p.outcome {
            Outcome::Value(v) => PredictionLine {
                id: p.id.clone(),
                value: Some(*v),
                error: None,
            },
            Outcome::Error(reason) => PredictionLine {
                id: p.id.clone(),
                value: None,
                error: Some(reason.clone()),
            },
        };
        text.push_str(&serde_json::to_string(&line).expect("plain data"));
        text.push('\n');
    }
    text
}

/// What scoring needs to know about an instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GoldRecord {
    pub id: String,
    pub gold: f64,
    pub network_id: String,
    pub primary_type: Option<ReasoningType>,
    /// Premises of one kind in the instance's network.
    pub premise_count: usize,
}

impl From<&DatasetInstance> for GoldRecord {
    fn from(inst: &DatasetInstance) -> Self {
        GoldRecord {
            id: inst.id.clone(),
            gold: inst.gold,
            network_id: inst.network_id.clone(),
            primary_type: inst.primary_type,
            premise_count: inst
                .premises
                .iter()
                .filter(|p| p.kind == PremiseKind::Numeric)
                .count(),
        }
    }
}

/// `|p̂ − p| ≤ max(1e-4 · max(p, p̂), 1e-9)`.
pub fn is_correct(gold: f64, predicted: f64) -> bool {
    (predicted - gold).abs() <= (RELATIVE_TOLERANCE * gold.max(predicted)).max(ABSOLUTE_FLOOR)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metrics {
    pub n: usize,
    pub correct: usize,
    pub wrong: usize,
    pub errors: usize,
    pub pct_correct: f64,
    pub pct_wrong: f64,
    pub pct_error: f64,
    pub rmse_50: f64,
    /// `None` when every prediction is an error.
    pub rmse_nonerror: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub overall: Metrics,
    pub by_reasoning_type: BTreeMap<String, Metrics>,
    pub by_network: BTreeMap<String, Metrics>,
    pub by_premise_count: BTreeMap<String, Metrics>,
}

/// Premise-count bucketing. Without edges every count is its own bucket;
/// with ascending edges `[e1, e2, ...]` the buckets are `<e1`, `e1-(e2-1)`,
/// ..., `>=ek`.
#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    pub bucket_edges: Vec<usize>,
}

fn bucket(count: usize, edges: &[usize]) -> String {
    if edges.is_empty() {
        return count.to_string();
    }
    match edges.iter().position(|&e| count < e) {
        Some(0) => format!("<{}", edges[0]),
        Some(i) => format!("{}-{}", edges[i - 1], edges[i] - 1),
        None => format!(">={}", edges[edges.len() - 1]),
    }
}

fn percent(part: usize, n: usize) -> f64 {
    if n == 0 {
        0.0
    } else {
        100.0 * part as f64 / n as f64
    }
}

fn metrics(pairs: &[(f64, &Outcome)]) -> Metrics {
    let n = pairs.len();
    let (mut correct, mut wrong, mut errors) = (0, 0, 0);
    let (mut sq_fallback, mut sq_valid) = (0.0, 0.0);
    for &(gold, outcome) in pairs {
        match outcome {
            Outcome::Value(p) => {
                if is_correct(gold, *p) {
                    correct += 1;
                } else {
                    wrong += 1;
                }
                let sq = (gold - p).powi(2);
                sq_fallback += sq;
                sq_valid += sq;
            }
            Outcome::Error(_) => {
                errors += 1;
                sq_fallback += (gold - FALLBACK).powi(2);
            }
        }
    }
    let valid = correct + wrong;
    Metrics {
        n,
        correct,
        wrong,
        errors,
        pct_correct: percent(correct, n),
        pct_wrong: percent(wrong, n),
        pct_error: percent(errors, n),
        rmse_50: if n == 0 {
            0.0
        } else {
            (sq_fallback / n as f64).sqrt()
        },
        rmse_nonerror: (valid > 0).then(|| (sq_valid / valid as f64).sqrt()),
    }
}

/// Scores `predictions` against `gold`. Every instance needs exactly one
/// prediction.
pub fn score(
    gold: &[GoldRecord],
    predictions: &[Prediction],
    options: &ScoreOptions,
) -> Result<MetricsReport, MetricsError> {
    let mut ids = HashSet::with_capacity(gold.len());
    for g in gold {
        if !ids.insert(g.id.as_str()) {
            return Err(MetricsError::DuplicateInstance(g.id.clone()));
        }
    }
    let mut by_id: HashMap<&str, &Outcome> = HashMap::with_capacity(predictions.len());
    for p in predictions {
        if !ids.contains(p.id.as_str()) {
            return Err(MetricsError::UnknownInstance(p.id.clone()));
        }
        if by_id.insert(p.id.as_str(), &p.outcome).is_some() {
            return Err(MetricsError::DuplicatePrediction(p.id.clone()));
        }
    }

    let mut all = Vec::with_capacity(gold.len());
    let mut types: BTreeMap<String, Vec<(f64, &Outcome)>> = BTreeMap::new();
    let mut networks: BTreeMap<String, Vec<(f64, &Outcome)>> = BTreeMap::new();
    let mut sizes: BTreeMap<String, Vec<(f64, &Outcome)>> = BTreeMap::new();
    for g in gold {
        let outcome = *by_id
            .get(g.id.as_str())
            .ok_or_else(|| MetricsError::MissingPrediction(g.id.clone()))?;
        let pair = (g.gold, outcome);
        all.push(pair);
        let label = g.primary_type.map_or("none", ReasoningType::as_str);
        types.entry(label.to_string()).or_default().push(pair);
        networks.entry(g.network_id.clone()).or_default().push(pair);
        sizes
            .entry(bucket(g.premise_count, &options.bucket_edges))
            .or_default()
            .push(pair);
    }
    let summarize = |groups: BTreeMap<String, Vec<(f64, &Outcome)>>| {
        groups
            .into_iter()
            .map(|(k, v)| (k, metrics(&v)))
            .collect::<BTreeMap<_, _>>()
    };
    Ok(MetricsReport {
        overall: metrics(&all),
        by_reasoning_type: summarize(types),
        by_network: summarize(networks),
        by_premise_count: summarize(sizes),
    })
}

/// Predicts 0.5 for every instance.
pub fn baseline_fifty(gold: &[GoldRecord]) -> Vec<Prediction> {
    gold.iter().map(|g| Prediction::value(&g.id, FALLBACK)).collect()
}
