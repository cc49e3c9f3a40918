//! The ProbLog fragment that categorical Bayesian networks compile to:
//! probabilistic facts, annotated disjunctions, ground rules with negated
//! body literals, `evidence/2` and `query/1`.
//!
//! * [`parse`] and [`serialize`] convert between text and [`ProblogProgram`].
//! * [`bn_to_problog`] and [`problog_to_bn`] convert between programs and
//!   networks; [`evaluate`] answers queries through the network.
//! * [`enumerate_worlds`] answers the same queries straight from the
//!   distribution semantics and serves as the independent check.

mod compile;
mod parser;
mod worlds;

use std::fmt;

use thiserror::Error;

use crate::inference::InferenceError;
use crate::model::ModelError;

pub use compile::{bn_to_problog, evaluate, problog_to_bn, query_program, CompiledProgram, StateRef};
pub use parser::{parse, SyntaxError};
pub use worlds::{enumerate_worlds, enumerate_worlds_with_limit, DEFAULT_WORLD_LIMIT};

/// Head probabilities of one clause may exceed one by at most this much.
pub const HEAD_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum ProblogError {
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
    #[error("InvalidProbability: clause {clause} has head probability {value} outside [0, 1]")]
    InvalidProbability { clause: usize, value: f64 },
    #[error("InvalidHeadSum: head probabilities of clause {clause} sum to {sum} > 1")]
    HeadSum { clause: usize, sum: f64 },
    #[error("UnsupportedFragment: {0}")]
    UnsupportedFragment(String),
    #[error("UnknownClause: `{0}` is not defined by any clause")]
    UnknownClause(String),
    #[error("NoQueries: the program has no query/1 statement")]
    NoQueries,
    #[error("ChoiceBoundExceeded: more than {limit} possible worlds")]
    ChoiceBound { limit: usize },
    #[error("UnstratifiedNegation: {0}")]
    UnstratifiedNegation(String),
    #[error("InvalidName: {0}")]
    InvalidName(String),
    #[error(transparent)]
    Inference(#[from] InferenceError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(String),
    Var(String),
}

impl Term {
    pub fn constant(value: impl Into<String>) -> Self {
        Term::Const(value.into())
    }

    pub fn is_ground(&self) -> bool {
        matches!(self, Term::Const(_))
    }
}

/// `true` for names that print without quotes: `[a-z][A-Za-z0-9_]*` or an
/// unsigned integer.
pub fn is_bare_constant(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_lowercase() => chars.all(|c| c.is_ascii_alphanumeric() || c == '_'),
        Some(c) if c.is_ascii_digit() => chars.all(|c| c.is_ascii_digit()),
        _ => false,
    }
}

/// `true` for valid predicate names.
pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

const RESERVED: &[&str] = &["not", "query", "evidence"];

pub(crate) fn is_reserved(s: &str) -> bool {
    RESERVED.contains(&s)
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => f.write_str(v),
            Term::Const(c) if is_bare_constant(c) => f.write_str(c),
            Term::Const(c) => {
                f.write_str("'")?;
                for ch in c.chars() {
                    match ch {
                        '\'' => f.write_str("\\'")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        _ => write!(f, "{ch}")?,
                    }
                }
                f.write_str("'")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<Term>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: &[&str]) -> Self {
        Atom {
            predicate: predicate.into(),
            args: args.iter().map(|a| Term::constant(*a)).collect(),
        }
    }

    pub fn is_ground(&self) -> bool {
        self.args.iter().all(Term::is_ground)
    }

    /// Rendering without spaces after commas, as solvers print answers.
    pub fn compact(&self) -> String {
        self.render(",")
    }

    fn render(&self, sep: &str) -> String {
        if self.args.is_empty() {
            return self.predicate.clone();
        }
        let args: Vec<String> = self.args.iter().map(Term::to_string).collect();
        format!("{}({})", self.predicate, args.join(sep))
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Literal {
    pub atom: Atom,
    pub negated: bool,
}

impl Literal {
    pub fn pos(atom: Atom) -> Self {
        Literal { atom, negated: false }
    }

    pub fn neg(atom: Atom) -> Self {
        Literal { atom, negated: true }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.negated {
            write!(f, "not {}", self.atom)
        } else {
            write!(f, "{}", self.atom)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbHead {
    pub probability: f64,
    pub atom: Atom,
}

impl ProbHead {
    pub fn new(probability: f64, atom: Atom) -> Self {
        ProbHead { probability, atom }
    }
}

/// A probabilistic fact (one head) or annotated disjunction (several heads),
/// optionally conditioned on a body.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    pub heads: Vec<ProbHead>,
    pub body: Vec<Literal>,
}

impl Clause {
    pub fn head_sum(&self) -> f64 {
        self.heads.iter().map(|h| h.probability).sum()
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, head) in self.heads.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{}::{}", format_probability(head.probability), head.atom)?;
        }
        if !self.body.is_empty() {
            f.write_str(" :- ")?;
            for (i, lit) in self.body.iter().enumerate() {
                if i > 0 {
                    f.write_str(", ")?;
                }
                write!(f, "{lit}")?;
            }
        }
        f.write_str(".")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub atom: Atom,
    pub value: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProblogProgram {
    pub clauses: Vec<Clause>,
    pub evidence: Vec<Evidence>,
    pub queries: Vec<Atom>,
}

impl ProblogProgram {
    /// Checks head probabilities: each in `[0, 1]`, summing to at most one
    /// (within [`HEAD_SUM_TOLERANCE`]) per clause.
    pub fn validate(&self) -> Result<(), ProblogError> {
        for (i, clause) in self.clauses.iter().enumerate() {
            for head in &clause.heads {
                let p = head.probability;
                if !(0.0..=1.0).contains(&p) {
                    return Err(ProblogError::InvalidProbability { clause: i, value: p });
                }
            }
            let sum = clause.head_sum();
            if sum > 1.0 + HEAD_SUM_TOLERANCE {
                return Err(ProblogError::HeadSum { clause: i, sum });
            }
        }
        Ok(())
    }
}

impl fmt::Display for ProblogProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&serialize(self))
    }
}

/// At most six fractional digits, trailing zeros trimmed, at least one kept.
pub fn format_probability(p: f64) -> String {
    let text = format!("{p:.6}");
    let trimmed = text.trim_end_matches('0');
    if trimmed.ends_with('.') {
        format!("{trimmed}0")
    } else {
        trimmed.to_string()
    }
}

/// Canonical program text: one statement per line, a blank line between
/// statements, clauses first, then evidence, then queries.
pub fn serialize(program: &ProblogProgram) -> String {
    let mut statements: Vec<String> = program.clauses.iter().map(Clause::to_string).collect();
    statements.extend(
        program
            .evidence
            .iter()
            .map(|e| format!("evidence({}, {}).", e.atom, e.value)),
    );
    statements.extend(program.queries.iter().map(|q| format!("query({q}).")));
    let mut text = statements.join("\n\n");
    text.push('\n');
    text
}
