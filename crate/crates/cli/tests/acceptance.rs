//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any gating criterion fails.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use bayesqa::dataset::{classify_reasoning, dataset_stats, read_instances, ReasoningType};
use bayesqa::fixtures;
use bayesqa::inference::{conditional_query, eliminate, marginal, Assignment};
use bayesqa::metrics::{score, GoldRecord, Prediction, ScoreOptions};
use bayesqa::model::state_product;
use bayesqa::problog::{
    bn_to_problog, enumerate_worlds, parse, problog_to_bn, query_program, serialize, Atom,
};
use bayesqa::subset::subset;
use bayesqa::synth::{random_network, redraw_cpts, RandomNetworkConfig};
use bayesqa::wep::{prob_to_wep, prob_to_wep_with_rate, WEP_TABLE};
use bayesqa::BayesianNetwork;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bayesqa"))
}

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn random_query<R: Rng>(net: &BayesianNetwork, rng: &mut R) -> Option<(Assignment, Assignment)> {
    for _ in 0..20 {
        let mut order: Vec<usize> = (0..net.len()).collect();
        order.shuffle(rng);
        let q = &net.variables[order[0]];
        let query = Assignment::single(&q.id, &q.states[rng.gen_range(0..q.cardinality())]);
        let mut evidence = Assignment::new();
        for &v in &order[1..=rng.gen_range(0..net.len())] {
            let var = &net.variables[v];
            evidence = evidence.with(&var.id, &var.states[rng.gen_range(0..var.cardinality())]);
        }
        if marginal(net, &evidence).ok()? > 0.0 {
            return Some((query, evidence));
        }
    }
    None
}

fn gallstone_end_to_end() -> Outcome {
    let start = Instant::now();
    let text = fs::read_to_string(fixture("gallstone.pl")).map_err(|e| e.to_string())?;
    let program = parse(&text).map_err(|e| e.to_string())?;
    let results = enumerate_worlds(&program).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (atom, p) = &results[0];
    let expected_atom = Atom::new("amylase", &["patient", "500-1400"]);

    let output = bin()
        .args(["solve", &fixture("gallstone.pl")])
        .output()
        .map_err(|e| e.to_string())?;
    let stdout = String::from_utf8_lossy(&output.stdout);
    check(
        *atom == expected_atom
            && (p - 0.011316399).abs() < 1e-6
            && elapsed < Duration::from_secs(1)
            && stdout.trim_end() == "amylase(patient,'500-1400'):\t0.011316399",
        format!("P = {p:.9} in {elapsed:?}; cli printed {:?}", stdout.trim_end()),
    )
}

fn gallstone_intermediates() -> Outcome {
    let net = fixtures::gallstone();
    // Chain-rule products over the published CPT entries.
    let with_stones = 0.1531 * 0.3925 * 0.0187;
    let without_stones = 0.8469 * 0.4307 * 0.0101;
    let flatulence = 0.1531 * 0.3925 + 0.8469 * 0.4307;
    let base = Assignment::single("amylase", "500-1400").with("flatulence", "yes");
    let got = [
        marginal(&net, &base.clone().with("gallstones", "yes")),
        marginal(&net, &base.clone().with("gallstones", "no")),
        marginal(&net, &base),
        marginal(&net, &Assignment::single("flatulence", "yes")),
    ]
    .into_iter()
    .collect::<Result<Vec<_>, _>>()
    .map_err(|e| e.to_string())?;
    let exact = [
        with_stones,
        without_stones,
        with_stones + without_stones,
        flatulence,
    ];
    let printed = [0.001124, 0.003684, 0.004808, 0.424856];
    let worst = got
        .iter()
        .zip(&exact)
        .map(|(g, e)| (g - e).abs())
        .fold(0.0, f64::max);
    let printed_gap: Vec<String> = got
        .iter()
        .zip(&printed)
        .map(|(g, p)| format!("{:.1e}", (g - p).abs()))
        .collect();
    check(
        worst < 5e-7,
        format!(
            "values {got:.9?}, max error vs exact {worst:.1e}; gaps to printed roundings {}",
            printed_gap.join(", ")
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let config = RandomNetworkConfig::default();
    let (mut networks, mut worst) = (0, 0.0f64);
    while networks < 1000 {
        let net = random_network(&mut rng, &config);
        let Some((query, evidence)) = random_query(&net, &mut rng) else {
            continue;
        };
        let a = conditional_query(&net, &query, &evidence)
            .map_err(|e| e.to_string())?
            .probability;
        let b = eliminate(&net, &query, &evidence)
            .map_err(|e| e.to_string())?
            .probability;
        let program = query_program(&net, "x", &query, &evidence).map_err(|e| e.to_string())?;
        let c = enumerate_worlds(&program).map_err(|e| e.to_string())?[0].1;
        worst = worst.max((a - b).abs()).max((a - c).abs()).max((b - c).abs());
        networks += 1;
    }
    let elapsed = start.elapsed();
    check(
        worst < 1e-9 && elapsed < Duration::from_secs(120),
        format!("{networks} networks, max pairwise gap {worst:.1e}, {elapsed:.2?}"),
    )
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(77);
    let config = RandomNetworkConfig::default();
    let (mut queries, mut worst) = (0, 0.0f64);
    for _ in 0..200 {
        let net = random_network(&mut rng, &config);
        let text = serialize(&bn_to_problog(&net, "s").map_err(|e| e.to_string())?);
        let compiled = problog_to_bn(&parse(&text).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        // Both programs name atoms identically, so queries can be compared
        // through the atoms they denote.
        let translate = |a: &Assignment| -> Result<Assignment, String> {
            let mut out = Assignment::new();
            for (var, state) in a.iter() {
                let v = net.variable(var).unwrap();
                let atom = if v.is_binary() {
                    Atom::new(var, &["s"])
                } else {
                    Atom::new(var, &["s", state])
                };
                let target = compiled.resolve(&atom).map_err(|e| e.to_string())?;
                let state = if v.is_binary() && v.state_index(state) == Some(1) {
                    let rv = compiled.network.variable(&target.variable).unwrap();
                    rv.states.iter().find(|s| **s != target.state).unwrap().clone()
                } else {
                    target.state.clone()
                };
                out = out.with(&target.variable, state);
            }
            Ok(out)
        };
        for _ in 0..3 {
            let Some((q, e)) = random_query(&net, &mut rng) else {
                continue;
            };
            let before = conditional_query(&net, &q, &e)
                .map_err(|e| e.to_string())?
                .probability;
            let after = conditional_query(&compiled.network, &translate(&q)?, &translate(&e)?)
                .map_err(|e| e.to_string())?
                .probability;
            worst = worst.max((before - after).abs());
            queries += 1;
        }
    }
    check(
        worst < 1e-10,
        format!("200 networks, {queries} queries, max gap {worst:.1e}"),
    )
}

fn five_node_subset() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(5);
    let template = fixtures::five_node();
    let kept = ["c", "d", "e"];
    let vars: Vec<_> = kept
        .iter()
        .map(|id| template.variable(id).unwrap().clone())
        .collect();
    // Extra index per variable means "unbound".
    let cards: Vec<usize> = vars.iter().map(|v| v.cardinality() + 1).collect();
    let assignments: Vec<Assignment> = state_product(&cards)
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
        .collect();
    let (mut queries, mut worst) = (0, 0.0f64);
    for _ in 0..50 {
        let net = redraw_cpts(&mut rng, &template);
        let small = subset(&net, &kept).map_err(|e| e.to_string())?;
        for q in assignments.iter().filter(|a| a.len() == 1) {
            let (qv, _) = q.iter().next().unwrap();
            for e in assignments.iter().filter(|e| !e.contains(qv)) {
                let a = conditional_query(&net, q, e)
                    .map_err(|x| x.to_string())?
                    .probability;
                let b = conditional_query(&small, q, e)
                    .map_err(|x| x.to_string())?
                    .probability;
                worst = worst.max((a - b).abs());
                queries += 1;
            }
        }
    }
    check(
        worst < 1e-10,
        format!("50 CPT draws, {queries} queries, max gap {worst:.1e}"),
    )
}

fn wep_rules() -> Outcome {
    let mut failures = Vec::new();
    let mut rng = ChaCha20Rng::seed_from_u64(6);
    for entry in &WEP_TABLE {
        let min = WEP_TABLE
            .iter()
            .map(|e| (e.anchor - entry.anchor).abs())
            .fold(f64::INFINITY, f64::min);
        for _ in 0..20 {
            let phrase = prob_to_wep_with_rate(entry.anchor, &mut rng, 0.0)
                .map_err(|e| e.to_string())?
                .phrase;
            let anchor = WEP_TABLE.iter().find(|e| e.phrase == phrase).unwrap().anchor;
            if (anchor - entry.anchor).abs() > min + 1e-12 {
                failures.push(format!("(a) {} -> {phrase}", entry.anchor));
            }
        }
    }

    let mut rng = ChaCha20Rng::seed_from_u64(38);
    let about_even = (0..10_000)
        .filter(|_| prob_to_wep(0.38, &mut rng).unwrap().phrase == "about even")
        .count();
    if about_even > 0 {
        failures.push(format!("(b) about even drawn {about_even} times"));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(70);
    let second = (0..10_000)
        .filter(|_| prob_to_wep(0.70, &mut rng).unwrap().used_second_closest)
        .count();
    let rate = second as f64 / 10_000.0;
    if (rate - 0.10).abs() > 0.01 {
        failures.push(format!("(c) second-closest rate {rate}"));
    }

    let draw = |seed| {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        (0..1000)
            .map(|i| prob_to_wep(f64::from(i) / 999.0, &mut rng).unwrap().phrase)
            .collect::<Vec<_>>()
    };
    if draw(9) != draw(9) {
        failures.push("(d) sequences differ".into());
    }
    check(
        failures.is_empty(),
        if failures.is_empty() {
            format!("about even at 0.38: {about_even}/10000, second-closest at 0.70: {rate:.4}")
        } else {
            failures.join("; ")
        },
    )
}

fn reasoning_patterns() -> Outcome {
    let net = fixtures::v_structure();
    let cases = [
        ("x3", vec!["x1"], ReasoningType::Causal),
        ("x1", vec!["x3"], ReasoningType::Evidential),
        ("x2", vec!["x3", "x1"], ReasoningType::ExplainingAway),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (query, observed, expected) in cases {
        let (_, primary) = classify_reasoning(&net, query, &observed);
        ok &= primary == Some(expected);
        lines.push(format!(
            "{query}|{}: {}",
            observed.join(","),
            primary.map_or("none", |t| t.as_str())
        ));
    }
    check(ok, lines.join("; "))
}

fn metrics_example() -> Outcome {
    let gold = |id: &str, gold: f64| GoldRecord {
        id: id.into(),
        gold,
        network_id: "n".into(),
        primary_type: None,
        premise_count: 1,
    };
    let report = score(
        &[gold("a", 0.1), gold("b", 0.5)],
        &[Prediction::value("a", 0.2), Prediction::error("b", "no answer")],
        &ScoreOptions::default(),
    )
    .map_err(|e| e.to_string())?;
    let m = &report.overall;
    let nonerror = m.rmse_nonerror.unwrap_or(f64::NAN);
    check(
        (m.pct_correct - 0.0).abs() < 1e-6
            && (m.pct_wrong - 50.0).abs() < 1e-6
            && (m.pct_error - 50.0).abs() < 1e-6
            && (m.rmse_50 - 0.005f64.sqrt()).abs() < 1e-6
            && (nonerror - 0.1).abs() < 1e-6,
        format!(
            "pct {}/{}/{}, rmse_50 {:.6}, rmse_nonerror {nonerror:.6}",
            m.pct_correct, m.pct_wrong, m.pct_error, m.rmse_50
        ),
    )
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let rel = path.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

fn generation_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut networks = vec![fixture("gallstone.json")];
    let mut originals = vec![("gallstone".to_string(), fixtures::gallstone())];
    let mut rng = ChaCha20Rng::seed_from_u64(9);
    for k in 0..2 {
        let net = random_network(&mut rng, &RandomNetworkConfig::default());
        let path = tmp.path().join(format!("random{k}.json"));
        bayesqa::format::save(&net, &path).map_err(|e| e.to_string())?;
        networks.push(path.display().to_string());
        originals.push((format!("random{k}"), net));
    }
    let run = |threads: &str, out: &Path| -> Result<(), String> {
        let mut cmd = bin();
        cmd.args([
            "gen-dataset",
            "--seed",
            "7",
            "--count",
            "40",
            "--threads",
            threads,
            "--out",
        ]);
        cmd.arg(out);
        for n in &networks {
            cmd.args(["--network", n]);
        }
        let status = cmd.output().map_err(|e| e.to_string())?;
        if status.status.success() {
            Ok(())
        } else {
            Err(String::from_utf8_lossy(&status.stderr).into_owned())
        }
    };
    let dirs = [tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c")];
    run("1", &dirs[0])?;
    run("1", &dirs[1])?;
    run("4", &dirs[2])?;
    let trees: Vec<_> = dirs.iter().map(|d| read_tree(d)).collect();
    let identical = trees[0] == trees[1] && trees[0] == trees[2];

    let (mut checked, mut worst) = (0, 0.0f64);
    for (id, net) in &originals {
        for inst in read_instances(&dirs[0].join(id).join("instances.jsonl")).map_err(|e| e.to_string())? {
            let oracle = conditional_query(net, &inst.query_assignment(), &inst.evidence_assignment())
                .map_err(|e| e.to_string())?
                .probability;
            worst = worst.max((oracle - inst.gold).abs());
            checked += 1;
        }
    }
    check(
        identical && worst < 1e-10 && checked == 120,
        format!(
            "{} files identical across runs and thread counts: {identical}; {checked} golds, max gap {worst:.1e}",
            trees[0].len()
        ),
    )
}

fn gallstone_stats() -> Outcome {
    let net = fixtures::gallstone();
    let s = dataset_stats(&[&net], &[]).map_err(|e| e.to_string())?;
    check(
        s.numeric_premises == 5 && (s.states_per_variable.mean - 7.0 / 3.0).abs() < 1e-9,
        format!(
            "{} premises, {:.9} states per variable",
            s.numeric_premises, s.states_per_variable.mean
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("gallstone query end to end", gallstone_end_to_end),
        ("gallstone intermediate marginals", gallstone_intermediates),
        ("oracle equivalence", oracle_equivalence),
        ("ProbLog round trip", round_trip),
        ("five-node subsetting", five_node_subset),
        ("WEP rules", wep_rules),
        ("reasoning classifier", reasoning_patterns),
        ("metrics worked example", metrics_example),
        ("generation determinism", generation_determinism),
        ("gallstone statistics", gallstone_stats),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "criterion  8b SKIP  50% baseline on the published test split: not gating, the split is not bundled"
    );
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
