use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use bayesqa::dataset::{
    classify_reasoning, dataset_stats, generate_dataset, network_seed, read_instances, write_dataset,
    DatasetInstance, DatasetStats, GenerateOptions, Summary,
};
use bayesqa::format;
use bayesqa::inference::{posterior, query_with, Assignment, Method};
use bayesqa::metrics::{
    baseline_fifty, format_predictions, parse_predictions, score, GoldRecord, Metrics, ScoreOptions,
};
use bayesqa::model::validate;
use bayesqa::problog::{
    bn_to_problog, enumerate_worlds, evaluate, parse, problog_to_bn, query_program, serialize,
};
use bayesqa::subset::subset_with_diagnostics;
use bayesqa::wep::{prob_to_wep, wep_to_prob, WEP_TABLE};
use bayesqa::BayesianNetwork;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::json;

use crate::{
    BaselineArgs, ClassifyArgs, Cli, Command, EngineArg, FromProblogArgs, GenDatasetArgs, InferArgs,
    MethodArg, OutputFormat, ScoreArgs, SolveArgs, StatsArgs, SubsetArgs, ToProblogArgs, ValidateArgs,
    WepArgs,
};

const RUN_FORMAT: &str = "bayesqa-run/1";

struct Output {
    format: OutputFormat,
    precision: usize,
}

impl Output {
    fn num(&self, x: f64) -> String {
        format!("{x:.*}", self.precision)
    }

    fn emit(&self, human: impl FnOnce() -> String, machine: impl Serialize) -> Result<()> {
        match self.format {
            OutputFormat::Human => print!("{}", human()),
            OutputFormat::Machine => println!("{}", serde_json::to_string(&machine)?),
        }
        Ok(())
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let out = Output {
        format: cli.format,
        precision: cli.precision,
    };
    match &cli.command {
        Command::Validate(args) => validate_cmd(&out, args),
        Command::Infer(args) => infer(&out, args),
        Command::Solve(args) => solve(&out, args),
        Command::ToProblog(args) => to_problog(&out, args),
        Command::FromProblog(args) => from_problog(&out, args),
        Command::Subset(args) => subset_cmd(&out, args),
        Command::GenDataset(args) => gen_dataset(&out, args, cli.seed),
        Command::Wep(args) => wep(&out, args, cli.seed),
        Command::Classify(args) => classify(&out, args),
        Command::Score(args) => score_cmd(&out, args),
        Command::Baseline(args) => baseline(&out, args),
        Command::Stats(args) => stats(&out, args),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("IoError: cannot read {}", path.display()))
}

fn load_network(path: &Path) -> Result<BayesianNetwork> {
    format::load(path).with_context(|| format!("loading {}", path.display()))
}

fn bindings(items: &[String]) -> Result<Assignment> {
    let mut out = Assignment::new();
    for item in items {
        let (var, state) = Assignment::parse_binding(item)?;
        out.bind(var, state)?;
    }
    Ok(out)
}

fn variable_part(text: &str) -> &str {
    text.split_once('=').map_or(text, |(v, _)| v).trim()
}

/// Writes `text` to `out` if given, else to stdout.
fn deliver(out: &Output, path: Option<&PathBuf>, text: &str) -> Result<()> {
    match path {
        Some(p) => {
            fs::write(p, text).with_context(|| format!("IoError: cannot write {}", p.display()))?;
            out.emit(String::new, json!({ "written": p }))
        }
        None => out.emit(|| text.to_string(), json!({ "content": text })),
    }
}

fn validate_cmd(out: &Output, args: &ValidateArgs) -> Result<()> {
    let net = format::from_str_unchecked(&read(&args.network)?)
        .with_context(|| format!("loading {}", args.network.display()))?;
    let report = validate(&net);
    out.emit(
        || {
            if report.is_valid() {
                "valid\n".to_string()
            } else {
                report.violations.iter().map(|v| format!("{v}\n")).collect()
            }
        },
        json!({ "valid": report.is_valid(), "violations": report.violations }),
    )?;
    if !report.is_valid() {
        bail!("InvalidNetwork: {} violation(s)", report.violations.len());
    }
    Ok(())
}

fn infer(out: &Output, args: &InferArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let evidence = bindings(&args.evidence)?;
    if !args.query.contains('=') {
        let var = net.require_variable(args.query.trim())?;
        if evidence.contains(&var.id) {
            bail!(
                "QueryEvidenceOverlap: variable `{}` is both queried and observed",
                var.id
            );
        }
        let dist = posterior(&net, &var.id, &evidence)?;
        return out.emit(
            || {
                var.states
                    .iter()
                    .zip(&dist)
                    .map(|(s, p)| format!("{s}\t{}\n", out.num(*p)))
                    .collect()
            },
            json!({
                "variable": var.id,
                "evidence": evidence,
                "states": var.states,
                "distribution": dist,
            }),
        );
    }
    let query = bindings(std::slice::from_ref(&args.query))?;
    let method = match args.method {
        MethodArg::Enumeration => Method::Enumeration,
        MethodArg::Elimination => Method::Elimination,
    };
    let result = query_with(&net, &query, &evidence, method)?;
    out.emit(
        || format!("{}\n", out.num(result.probability)),
        json!({
            "query": query,
            "evidence": evidence,
            "probability": result.probability,
            "method": result.method,
        }),
    )
}

fn solve(out: &Output, args: &SolveArgs) -> Result<()> {
    let program = parse(&read(&args.program)?)?;
    let results = match args.engine {
        EngineArg::Worlds => enumerate_worlds(&program)?,
        EngineArg::Network => evaluate(&program)?,
    };
    out.emit(
        || {
            results
                .iter()
                .map(|(atom, p)| format!("{}:\t{}\n", atom.compact(), out.num(*p)))
                .collect()
        },
        json!({
            "results": results
                .iter()
                .map(|(atom, p)| json!({ "query": atom.compact(), "probability": p }))
                .collect::<Vec<_>>(),
        }),
    )
}

fn to_problog(out: &Output, args: &ToProblogArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let program = match &args.query {
        Some(q) => {
            let query = bindings(std::slice::from_ref(q))?;
            query_program(&net, &args.entity, &query, &bindings(&args.evidence)?)?
        }
        None => bn_to_problog(&net, &args.entity)?,
    };
    deliver(out, args.out.as_ref(), &serialize(&program))
}

fn from_problog(out: &Output, args: &FromProblogArgs) -> Result<()> {
    let program = parse(&read(&args.program)?)?;
    let compiled = problog_to_bn(&program)?;
    deliver(out, args.out.as_ref(), &format::to_string(&compiled.network)?)
}

fn subset_cmd(out: &Output, args: &SubsetArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let outcome = subset_with_diagnostics(&net, &args.keep)?;
    for w in &outcome.warnings {
        eprintln!("warning: {w}");
    }
    deliver(out, args.out.as_ref(), &format::to_string(&outcome.network)?)
}

#[derive(Serialize)]
struct RunManifest {
    format: &'static str,
    seed: u64,
    count: usize,
    entity: String,
    networks: Vec<RunNetwork>,
}

#[derive(Serialize)]
struct RunNetwork {
    id: String,
    file: String,
    seed: u64,
    instances: usize,
}

fn network_id(path: &Path) -> Result<String> {
    path.file_stem()
        .and_then(|s| s.to_str())
        .map(str::to_string)
        .with_context(|| format!("InvalidPath: no file name in {}", path.display()))
}

fn gen_dataset(out: &Output, args: &GenDatasetArgs, seed: u64) -> Result<()> {
    let mut ids = BTreeSet::new();
    let mut jobs = Vec::with_capacity(args.network.len());
    for (k, path) in args.network.iter().enumerate() {
        let id = network_id(path)?;
        if !ids.insert(id.clone()) {
            bail!("DuplicateNetwork: two network files are named `{id}`");
        }
        let options = GenerateOptions {
            network_id: id,
            count: args.count,
            seed: network_seed(seed, k),
            entity: args.entity.clone(),
        };
        jobs.push((path, load_network(path)?, options));
    }

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = args.threads {
        pool = pool.num_threads(n);
    }
    let pool = pool.build()?;
    let datasets = pool.install(|| {
        jobs.iter()
            .map(|(_, net, options)| generate_dataset(net, options))
            .collect::<Result<Vec<_>, _>>()
    })?;

    fs::create_dir_all(&args.out)
        .with_context(|| format!("IoError: cannot create {}", args.out.display()))?;
    let mut manifest = RunManifest {
        format: RUN_FORMAT,
        seed,
        count: args.count,
        entity: args.entity.clone(),
        networks: Vec::with_capacity(jobs.len()),
    };
    for ((path, _, options), dataset) in jobs.iter().zip(&datasets) {
        write_dataset(dataset, &args.out.join(&options.network_id))?;
        manifest.networks.push(RunNetwork {
            id: options.network_id.clone(),
            file: path.display().to_string(),
            seed: options.seed,
            instances: dataset.instances.len(),
        });
    }
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    fs::write(args.out.join("manifest.json"), text)?;

    out.emit(
        || {
            manifest
                .networks
                .iter()
                .map(|n| format!("{}\t{} instances\tseed {}\n", n.id, n.instances, n.seed))
                .collect()
        },
        &manifest,
    )
}

fn wep(out: &Output, args: &WepArgs, seed: u64) -> Result<()> {
    if args.table {
        return out.emit(
            || {
                WEP_TABLE
                    .iter()
                    .map(|e| format!("{}\t{}\n", e.phrase, e.anchor))
                    .collect()
            },
            WEP_TABLE.to_vec(),
        );
    }
    if let Some(phrase) = &args.phrase {
        let anchor = wep_to_prob(phrase)?;
        return out.emit(
            || format!("{}\n", out.num(anchor)),
            json!({ "phrase": phrase.trim().to_lowercase(), "probability": anchor }),
        );
    }
    let p = args.probability.expect("clap requires one mode");
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let selections = (0..args.draws)
        .map(|_| prob_to_wep(p, &mut rng))
        .collect::<Result<Vec<_>, _>>()?;
    out.emit(
        || selections.iter().map(|s| format!("{}\n", s.phrase)).collect(),
        json!({ "probability": p, "seed": seed, "selections": selections }),
    )
}

fn classify(out: &Output, args: &ClassifyArgs) -> Result<()> {
    let net = load_network(&args.network)?;
    let query = net.require_variable(variable_part(&args.query))?.id.clone();
    let mut observed = Vec::with_capacity(args.evidence.len());
    for e in &args.evidence {
        let id = net.require_variable(variable_part(e))?.id.as_str();
        if id == query {
            bail!("QueryEvidenceOverlap: variable `{id}` is both queried and observed");
        }
        observed.push(id);
    }
    let (types, primary) = classify_reasoning(&net, &query, &observed);
    out.emit(
        || {
            let labels: Vec<&str> = types.iter().map(|t| t.as_str()).collect();
            format!(
                "types\t{}\nprimary\t{}\n",
                if labels.is_empty() {
                    "none".to_string()
                } else {
                    labels.join(",")
                },
                primary.map_or("none", |t| t.as_str())
            )
        },
        json!({ "query": query, "observed": observed, "types": types, "primary": primary }),
    )
}

fn load_instances(paths: &[PathBuf]) -> Result<Vec<DatasetInstance>> {
    let mut all = Vec::new();
    for path in paths {
        all.extend(read_instances(path).with_context(|| format!("loading {}", path.display()))?);
    }
    Ok(all)
}

fn metrics_row(out: &Output, label: &str, m: &Metrics) -> String {
    format!(
        "{label:<24}{:>8}{:>10.2}{:>10.2}{:>10.2}  {}  {}\n",
        m.n,
        m.pct_correct,
        m.pct_wrong,
        m.pct_error,
        out.num(m.rmse_50),
        m.rmse_nonerror.map_or("-".to_string(), |r| out.num(r)),
    )
}

fn score_cmd(out: &Output, args: &ScoreArgs) -> Result<()> {
    let gold: Vec<GoldRecord> = load_instances(&args.instances)?
        .iter()
        .map(GoldRecord::from)
        .collect();
    let predictions = parse_predictions(&read(&args.predictions)?)?;
    let options = ScoreOptions {
        bucket_edges: args.bucket_edges.clone(),
    };
    let report = score(&gold, &predictions, &options)?;
    out.emit(
        || {
            let mut text = format!(
                "{:<24}{:>8}{:>10}{:>10}{:>10}  rmse_50  rmse_nonerror\n",
                "group", "n", "%correct", "%wrong", "%error"
            );
            text.push_str(&metrics_row(out, "overall", &report.overall));
            let sections = [
                ("type", &report.by_reasoning_type),
                ("network", &report.by_network),
                ("premises", &report.by_premise_count),
            ];
            for (prefix, groups) in sections {
                for (k, m) in groups {
                    text.push_str(&metrics_row(out, &format!("{prefix}:{k}"), m));
                }
            }
            text
        },
        &report,
    )
}

fn baseline(out: &Output, args: &BaselineArgs) -> Result<()> {
    let gold: Vec<GoldRecord> = load_instances(&args.instances)?
        .iter()
        .map(GoldRecord::from)
        .collect();
    let text = format_predictions(&baseline_fifty(&gold));
    match &args.out {
        Some(p) => {
            fs::write(p, &text).with_context(|| format!("IoError: cannot write {}", p.display()))?;
            out.emit(String::new, json!({ "written": p, "predictions": gold.len() }))
        }
        // Prediction lines are already machine-readable.
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn stats(out: &Output, args: &StatsArgs) -> Result<()> {
    let networks = args
        .network
        .iter()
        .map(|p| load_network(p))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&BayesianNetwork> = networks.iter().collect();
    let instances = load_instances(&args.instances)?;
    let s = dataset_stats(&refs, &instances)?;
    out.emit(|| human_stats(out, &s), &s)
}

fn human_stats(out: &Output, s: &DatasetStats) -> String {
    let summary = |x: &Summary| format!("{} ± {}", out.num(x.mean), out.num(x.std));
    let mut text = String::new();
    let _ = writeln!(text, "networks\t{}", s.networks);
    let _ = writeln!(
        text,
        "variables per network\t{}",
        summary(&s.variables_per_network)
    );
    let _ = writeln!(text, "states per variable\t{}", summary(&s.states_per_variable));
    let _ = writeln!(text, "premises per network\t{}", summary(&s.premises_per_network));
    let _ = writeln!(text, "numeric premises\t{}", s.numeric_premises);
    let _ = writeln!(text, "wep premises\t{}", s.wep_premises);
    let _ = writeln!(text, "instances\t{}", s.instances);
    let _ = writeln!(text, "evidence statements\t{}", s.evidence_statements);
    let _ = writeln!(text, "queries\t{}", s.queries);
    for (k, v) in &s.primary_types {
        let _ = writeln!(text, "primary {k}\t{v}");
    }
    text
}
