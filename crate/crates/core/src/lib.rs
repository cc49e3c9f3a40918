//! Exact inference over categorical Bayesian networks, an evaluator for the
//! ProbLog fragment those networks compile to, and the tooling to turn
//! networks into probabilistic question-answering datasets and score
//! predictions against them.

pub mod dataset;
pub mod fixtures;
pub mod format;
pub mod inference;
pub mod metrics;
pub mod model;
pub mod problog;
pub mod subset;
pub mod synth;
pub mod wep;

pub use inference::{Assignment, Method, QueryResult};
pub use model::{BayesianNetwork, Cpt, CptRow, RandomVariable};
