//! `bench`: pipeline verdicts against the exhaustive oracle over a corpus.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Context;
use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rcycle::generators::{gen_hardness_instance, CorpusSpec};
use rcycle::oracles::brute_longest_cycle;
use rcycle::{decide_long_cycle, DecideOptions, Verdict};

use crate::{emit, envelope, open_output, read_json, HierarchyArgs, Output};

#[derive(Args)]
pub(crate) struct BenchArgs {
    /// JSON array of {"spec": ..., "alpha"?: ..., "c_override"?: ...}; a built-in corpus otherwise.
    #[arg(long)]
    corpus: Option<PathBuf>,
    /// Largest instance handed to the exhaustive oracle.
    #[arg(long, default_value_t = 18)]
    cap: usize,
    /// Let small instances take the exhaustive route instead of forcing the pipeline.
    #[arg(long)]
    allow_shortcut: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    threads: Option<usize>,
    #[command(flatten)]
    hierarchy: HierarchyArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Debug, Deserialize)]
struct Entry {
    spec: CorpusSpec,
    /// Defaults to the minimum degree over n.
    alpha: Option<f64>,
    c_override: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Row {
    instance: String,
    n: usize,
    c: Option<usize>,
    verdict: Option<Verdict>,
    oracle_verdict: Option<Verdict>,
    agreement: Option<bool>,
    ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct BenchReport {
    rows: Vec<Row>,
    compared: usize,
    agreed: usize,
    errors: usize,
}

fn builtin_corpus() -> Vec<Entry> {
    let entry = |spec, c| Entry { spec, alpha: None, c_override: Some(c) };
    let mut out = Vec::new();
    for d in 3..=5 {
        out.push(entry(CorpusSpec::TwoCliques { d }, 1));
    }
    for a in 3..=6 {
        out.push(entry(CorpusSpec::CompleteBipartite { a, b: a }, 1));
    }
    out.push(entry(CorpusSpec::TriangleReplacement { base: Box::new(CorpusSpec::Clique { n: 4 }) }, 1));
    out.push(entry(CorpusSpec::DisjointUnion { parts: vec![CorpusSpec::Clique { n: 5 }, CorpusSpec::Clique { n: 5 }] }, 2));
    for seed in 0..3 {
        out.push(entry(CorpusSpec::RandomRegular { n: 12, d: 6, seed }, 1));
    }
    out.push(entry(CorpusSpec::Jung { k: 4, d: 4 }, 1));
    out
}

fn run_entry(e: &Entry, base: &DecideOptions, cap: usize) -> Row {
    let mut row = Row {
        instance: e.spec.to_string(),
        n: 0,
        c: None,
        verdict: None,
        oracle_verdict: None,
        agreement: None,
        ms: 0.0,
        error: None,
    };
    let g = match gen_hardness_instance(&e.spec) {
        Ok(g) => g,
        Err(err) => {
            row.error = Some(err.to_string());
            return row;
        }
    };
    row.n = g.n();
    let alpha = e.alpha.unwrap_or(g.min_degree() as f64 / g.n().max(1) as f64);
    let opts = DecideOptions { c_override: e.c_override.or(base.c_override), ..base.clone() };
    let start = Instant::now();
    let report = decide_long_cycle(&g, alpha, &opts);
    row.ms = start.elapsed().as_secs_f64() * 1e3;
    let report = match report {
        Ok(r) => r,
        Err(err) => {
            row.error = Some(err.to_string());
            return row;
        }
    };
    row.c = Some(report.c_used);
    row.verdict = Some(report.verdict);
    if g.n() <= cap {
        match brute_longest_cycle(&g, cap) {
            Ok(len) => {
                let truth = if len >= g.n().saturating_sub(report.c_used) { Verdict::Yes } else { Verdict::No };
                row.oracle_verdict = Some(truth);
                row.agreement = Some(truth == report.verdict);
            }
            Err(err) => row.error = Some(err.to_string()),
        }
    }
    row
}

fn label(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::Yes) => "yes",
        Some(Verdict::No) => "no",
        None => "-",
    }
}

pub(crate) fn run(args: &BenchArgs) -> anyhow::Result<ExitCode> {
    let hierarchy = args.hierarchy.options(args.seed)?;
    let corpus: Vec<Entry> = match &args.corpus {
        Some(p) => serde_json::from_value(read_json(p)?).context("reading corpus entries")?,
        None => builtin_corpus(),
    };
    let file = open_output(args.out.output.as_deref())?;
    let base = DecideOptions { hierarchy, force_pipeline: !args.allow_shortcut, seed: args.seed, ..DecideOptions::default() };

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(t) = args.threads {
        pool = pool.num_threads(t);
    }
    let rows: Vec<Row> = pool.build()?.install(|| corpus.par_iter().map(|e| run_entry(e, &base, args.cap)).collect());

    let compared = rows.iter().filter(|r| r.agreement.is_some()).count();
    let agreed = rows.iter().filter(|r| r.agreement == Some(true)).count();
    let errors = rows.iter().filter(|r| r.error.is_some()).count();
    let report = BenchReport { rows, compared, agreed, errors };
    let v = envelope(&report)?;
    emit(&v, &args.out, file, || {
        let width = report.rows.iter().map(|r| r.instance.len()).max().unwrap_or(8).max(8);
        let mut s = format!("{:<width$}  {:>4}  {:>4}  {:>7}  {:>6}  {:>5}  {:>9}\n", "instance", "n", "c", "verdict", "oracle", "agree", "ms");
        for r in &report.rows {
            let c = r.c.map_or("-".to_string(), |c| c.to_string());
            let agree = match r.agreement {
                Some(true) => "yes",
                Some(false) => "NO",
                None => "-",
            };
            s.push_str(&format!(
                "{:<width$}  {:>4}  {:>4}  {:>7}  {:>6}  {:>5}  {:>9.2}",
                r.instance,
                r.n,
                c,
                label(r.verdict),
                label(r.oracle_verdict),
                agree,
                r.ms
            ));
            if let Some(e) = &r.error {
                s.push_str(&format!("  error: {e}"));
            }
            s.push('\n');
        }
        s.push_str(&format!("agreement {}/{}, errors {}", report.agreed, report.compared, report.errors));
        s
    })?;
    Ok(if report.agreed == report.compared && report.errors == 0 { ExitCode::SUCCESS } else { ExitCode::from(1) })
}
