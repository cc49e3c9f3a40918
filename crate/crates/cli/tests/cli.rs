use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    format!("{}/../core/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn bayesqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bayesqa"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn machine(args: &[&str]) -> Value {
    let mut all = vec!["--format", "machine"];
    all.extend_from_slice(args);
    let out = bayesqa(&all);
    assert!(out.status.success(), "{}", stderr(&out));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn solve_prints_solver_style_answer() {
    let out = bayesqa(&["solve", &fixture("gallstone.pl")]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "amylase(patient,'500-1400'):\t0.011316399\n");
    let out = bayesqa(&["solve", "--engine", "network", &fixture("gallstone.pl")]);
    assert_eq!(stdout(&out), "amylase(patient,'500-1400'):\t0.011316399\n");
}

#[test]
fn infer_agrees_with_solve() {
    let net = fixture("gallstone.json");
    for method in ["enumeration", "elimination"] {
        let out = bayesqa(&[
            "infer",
            "--network",
            &net,
            "--query",
            "amylase=500-1400",
            "--evidence",
            "flatulence=yes",
            "--method",
            method,
        ]);
        assert_eq!(stdout(&out), "0.011316399\n");
    }
    let v = machine(&[
        "infer",
        "--network",
        &net,
        "--query",
        "amylase='500-1400'",
        "--evidence",
        "flatulence=yes",
    ]);
    assert!((v["probability"].as_f64().unwrap() - 0.011316399).abs() < 1e-9);
}

#[test]
fn posterior_and_precision() {
    let out = bayesqa(&[
        "--precision",
        "4",
        "infer",
        "--network",
        &fixture("gallstone.json"),
        "--query",
        "gallstones",
    ]);
    assert_eq!(stdout(&out), "yes\t0.1531\nno\t0.8469\n");
}

#[test]
fn domain_errors_exit_one_with_error_name() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            write(dir.path(), "unknown.pl", "0.5::a :- c.\nquery(a).\n"),
            "UnknownClause",
        ),
        (
            write(dir.path(), "open.pl", "0.5::a(X).\nquery(a(x)).\n"),
            "UnsupportedFragment",
        ),
        (write(dir.path(), "syntax.pl", "0.5::a\n"), "SyntaxError"),
        (
            write(dir.path(), "zero.pl", "0.0::a.\nevidence(a, true).\nquery(a).\n"),
            "ZeroProbabilityEvidence",
        ),
    ];
    for (path, name) in cases {
        let out = bayesqa(&["solve", &path]);
        assert_eq!(out.status.code(), Some(1), "{path}");
        assert!(stderr(&out).contains(name), "{path}: {}", stderr(&out));
    }
    let out = bayesqa(&[
        "infer",
        "--network",
        &fixture("gallstone.json"),
        "--query",
        "amylase=high",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("UnknownState"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(bayesqa(&["solve"]).status.code(), Some(2));
    assert_eq!(bayesqa(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(bayesqa(&["--format", "xml", "stats"]).status.code(), Some(2));
}

#[test]
fn validate_lists_violations() {
    let dir = tempfile::tempdir().unwrap();
    let good = bayesqa(&["validate", &fixture("gallstone.json")]);
    assert_eq!(stdout(&good), "valid\n");
    let text = fs::read_to_string(fixture("gallstone.json"))
        .unwrap()
        .replace("0.1531", "0.2531");
    let bad = write(dir.path(), "bad.json", &text);
    let out = bayesqa(&["validate", &bad]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("sums to"));
    assert!(stderr(&out).contains("InvalidNetwork"));
    let v: Value =
        serde_json::from_str(&stdout(&bayesqa(&["--format", "machine", "validate", &bad]))).unwrap();
    assert_eq!(v["violations"][0]["kind"], "row_sum");
}

#[test]
fn problog_translation_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let program = dir.path().join("g.pl").display().to_string();
    let network = dir.path().join("g.json").display().to_string();
    let to = bayesqa(&[
        "to-problog",
        &fixture("gallstone.json"),
        "--entity",
        "patient",
        "--query",
        "amylase=500-1400",
        "--evidence",
        "flatulence=yes",
        "--out",
        &program,
    ]);
    assert!(to.status.success(), "{}", stderr(&to));
    assert_eq!(
        stdout(&bayesqa(&["solve", &program])),
        "amylase(patient,'500-1400'):\t0.011316399\n"
    );
    let from = bayesqa(&["from-problog", &program, "--out", &network]);
    assert!(from.status.success(), "{}", stderr(&from));
    let out = bayesqa(&[
        "infer",
        "--network",
        &network,
        "--query",
        "amylase=500-1400",
        "--evidence",
        "flatulence=yes",
    ]);
    assert_eq!(stdout(&out), "0.011316399\n");
}

#[test]
fn subset_warns_and_preserves_marginals() {
    let dir = tempfile::tempdir().unwrap();
    let small = dir.path().join("s.json").display().to_string();
    let out = bayesqa(&[
        "subset",
        &fixture("gallstone.json"),
        "--keep",
        "amylase,flatulence",
        "--out",
        &small,
    ]);
    assert!(out.status.success());
    assert!(stderr(&out).contains("warning"));
    let p = bayesqa(&["infer", "--network", &small, "--query", "flatulence=yes"]);
    assert_eq!(stdout(&p), "0.424851580\n");
}

#[test]
fn gen_dataset_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, threads: &str| {
        let out = dir.path().join(name);
        let status = bayesqa(&[
            "--seed",
            "7",
            "gen-dataset",
            "--network",
            &fixture("gallstone.json"),
            "--count",
            "12",
            "--threads",
            threads,
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(status.status.success(), "{}", stderr(&status));
        out
    };
    let a = run("a", "1");
    let b = run("b", "3");
    for file in [
        "manifest.json",
        "gallstone/instances.jsonl",
        "gallstone/premises.json",
        "gallstone/manifest.json",
    ] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 7);
    assert_eq!(fs::read_dir(a.join("gallstone/programs")).unwrap().count(), 12);
}

#[test]
fn baseline_and_score() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("d");
    bayesqa(&[
        "gen-dataset",
        "--network",
        &fixture("gallstone.json"),
        "--count",
        "10",
        "--out",
        out.to_str().unwrap(),
    ]);
    let instances = out.join("gallstone/instances.jsonl").display().to_string();
    let predictions = dir.path().join("p.jsonl").display().to_string();
    assert!(
        bayesqa(&["baseline", "--instances", &instances, "--out", &predictions])
            .status
            .success()
    );
    let report = machine(&["score", "--instances", &instances, "--predictions", &predictions]);
    assert_eq!(report["overall"]["n"], 10);
    assert_eq!(report["overall"]["pct_error"], 0.0);
    assert_eq!(report["overall"]["rmse_50"], report["overall"]["rmse_nonerror"]);

    let doubled = fs::read_to_string(&predictions).unwrap().repeat(2);
    let dup = write(dir.path(), "dup.jsonl", &doubled);
    let out = bayesqa(&["score", "--instances", &instances, "--predictions", &dup]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("DuplicatePrediction"));
}

#[test]
fn wep_is_seeded() {
    let a = stdout(&bayesqa(&[
        "--seed",
        "4",
        "wep",
        "--probability",
        "0.7",
        "--draws",
        "50",
    ]));
    let b = stdout(&bayesqa(&[
        "--seed",
        "4",
        "wep",
        "--probability",
        "0.7",
        "--draws",
        "50",
    ]));
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 50);
    assert_eq!(stdout(&bayesqa(&["wep", "--probability", "1"])), "certain\n");
    assert_eq!(
        stdout(&bayesqa(&[
            "--precision",
            "2",
            "wep",
            "--phrase",
            "Almost Certain"
        ])),
        "0.95\n"
    );
    let out = bayesqa(&["wep", "--phrase", "perhaps"]);
    assert!(stderr(&out).contains("UnknownPhrase"));
    assert_eq!(bayesqa(&["wep", "--probability", "1.5"]).status.code(), Some(1));
}

#[test]
fn classify_and_stats() {
    let net = fixture("gallstone.json");
    let v = machine(&[
        "classify",
        "--network",
        &net,
        "--query",
        "gallstones",
        "--evidence",
        "flatulence",
    ]);
    assert_eq!(v["primary"], "evidential");
    let v = machine(&[
        "classify",
        "--network",
        &net,
        "--query",
        "amylase=500-1400",
        "--evidence",
        "gallstones=yes",
    ]);
    assert_eq!(v["primary"], "causal");
    let s = machine(&["stats", "--network", &net]);
    assert_eq!(s["numeric_premises"], 5);
    assert!((s["states_per_variable"]["mean"].as_f64().unwrap() - 7.0 / 3.0).abs() < 1e-12);
}
