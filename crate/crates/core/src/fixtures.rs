//! Small hand-specified networks used by tests, examples and the CLI docs.

use crate::model::{BayesianNetwork, Cpt, CptRow, RandomVariable};

/// Gallstones, flatulence and amylase level: three variables, five CPT rows.
pub fn gallstone() -> BayesianNetwork {
    BayesianNetwork::new(
        "gallstone",
        vec![
            RandomVariable::new("gallstones", "gallstones", &["yes", "no"]),
            RandomVariable::new("flatulence", "flatulence", &["yes", "no"]),
            RandomVariable::new("amylase", "amylase level", &["0-299", "300-499", "500-1400"]),
        ],
        vec![
            Cpt::root("gallstones", &[0.1531, 0.8469]),
            Cpt::new(
                "flatulence",
                &["gallstones"],
                vec![
                    CptRow::new(&["yes"], &[0.3925, 0.6075]),
                    CptRow::new(&["no"], &[0.4307, 0.5693]),
                ],
            ),
            Cpt::new(
                "amylase",
                &["gallstones"],
                vec![
                    CptRow::new(&["yes"], &[0.9346, 0.0467, 0.0187]),
                    CptRow::new(&["no"], &[0.9730, 0.0169, 0.0101]),
                ],
            ),
        ],
    )
    .with_source("medical")
}

/// The ProbLog program for [`gallstone`] with one evidence and one query.
pub const GALLSTONE_PROGRAM: &str = "\
0.1531::gallstones(patient).

0.3925::flatulence(patient) :- gallstones(patient).

0.4307::flatulence(patient) :- not gallstones(patient).

0.9346::amylase(patient, '0-299'); 0.0467::amylase(patient, '300-499'); 0.0187::amylase(patient, '500-1400') :- gallstones(patient).

0.9730::amylase(patient, '0-299'); 0.0169::amylase(patient, '300-499'); 0.0101::amylase(patient, '500-1400') :- not gallstones(patient).

evidence(flatulence(patient), true).

query(amylase(patient, '500-1400')).
";

/// Binary chain `a -> b -> c`.
pub fn chain() -> BayesianNetwork {
    BayesianNetwork::new(
        "chain",
        vec![
            RandomVariable::new("a", "A", &["yes", "no"]),
            RandomVariable::new("b", "B", &["yes", "no"]),
            RandomVariable::new("c", "C", &["yes", "no"]),
        ],
        vec![
            Cpt::root("a", &[0.3, 0.7]),
            Cpt::new(
                "b",
                &["a"],
                vec![
                    CptRow::new(&["yes"], &[0.9, 0.1]),
                    CptRow::new(&["no"], &[0.2, 0.8]),
                ],
            ),
            Cpt::new(
                "c",
                &["b"],
                vec![
                    CptRow::new(&["yes"], &[0.6, 0.4]),
                    CptRow::new(&["no"], &[0.05, 0.95]),
                ],
            ),
        ],
    )
}

/// The v-structure `x1 -> x3 <- x2`.
pub fn v_structure() -> BayesianNetwork {
    BayesianNetwork::new(
        "v-structure",
        vec![
            RandomVariable::new("x1", "rain", &["yes", "no"]),
            RandomVariable::new("x2", "road cleaning", &["yes", "no"]),
            RandomVariable::new("x3", "wet street", &["yes", "no"]),
        ],
        vec![
            Cpt::root("x1", &[0.2, 0.8]),
            Cpt::root("x2", &[0.1, 0.9]),
            Cpt::new(
                "x3",
                &["x1", "x2"],
                vec![
                    CptRow::new(&["yes", "yes"], &[0.99, 0.01]),
                    CptRow::new(&["yes", "no"], &[0.9, 0.1]),
                    CptRow::new(&["no", "yes"], &[0.8, 0.2]),
                    CptRow::new(&["no", "no"], &[0.05, 0.95]),
                ],
            ),
        ],
    )
}

/// Five nodes: `a -> c <- b`, `c -> d`, `c -> e`, with `c` three-valued.
pub fn five_node() -> BayesianNetwork {
    BayesianNetwork::new(
        "five-node",
        vec![
            RandomVariable::new("a", "A", &["yes", "no"]),
            RandomVariable::new("b", "B", &["yes", "no"]),
            RandomVariable::new("c", "C", &["low", "mid", "high"]),
            RandomVariable::new("d", "D", &["yes", "no"]),
            RandomVariable::new("e", "E", &["yes", "no"]),
        ],
        vec![
            Cpt::root("a", &[0.35, 0.65]),
            Cpt::root("b", &[0.6, 0.4]),
            Cpt::new(
                "c",
                &["a", "b"],
                vec![
                    CptRow::new(&["yes", "yes"], &[0.1, 0.3, 0.6]),
                    CptRow::new(&["yes", "no"], &[0.2, 0.5, 0.3]),
                    CptRow::new(&["no", "yes"], &[0.5, 0.25, 0.25]),
                    CptRow::new(&["no", "no"], &[0.7, 0.2, 0.1]),
                ],
            ),
            Cpt::new(
                "d",
                &["c"],
                vec![
                    CptRow::new(&["low"], &[0.1, 0.9]),
                    CptRow::new(&["mid"], &[0.5, 0.5]),
                    CptRow::new(&["high"], &[0.85, 0.15]),
                ],
            ),
            Cpt::new(
                "e",
                &["c"],
                vec![
                    CptRow::new(&["low"], &[0.3, 0.7]),
                    CptRow::new(&["mid"], &[0.45, 0.55]),
                    CptRow::new(&["high"], &[0.95, 0.05]),
                ],
            ),
        ],
    )
}

/// A single binary root with `P(yes) = p`.
pub fn single_binary(id: &str, p: f64) -> BayesianNetwork {
    BayesianNetwork::new(
        id,
        vec![RandomVariable::new(id, id, &["yes", "no"])],
        vec![Cpt::root(id, &[p, 1.0 - p])],
    )
}
