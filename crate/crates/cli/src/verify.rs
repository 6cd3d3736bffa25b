//! `verify`: re-checks emitted artifacts against the graph they describe.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::Args;
use serde::Serialize;
use serde_json::Value;

use rcycle::partition::check_robust_partition;
use rcycle::spectral::{beta_counts, conductance_counts};
use rcycle::{verify_cycle, Cycle, DecisionReport, Graph, RobustPartition, Verdict, VertexSet};

use crate::{emit, envelope, open_output, read_graph, read_json, usage, Output};

#[derive(Args)]
pub(crate) struct VerifyArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Require the graph to be regular.
    #[arg(long)]
    regular: bool,
    /// A decide report, an oracle longest-cycle report, or a bare vertex array.
    #[arg(long)]
    cycle: Option<PathBuf>,
    /// Minimum cycle length; defaults to the threshold recorded in the artifact.
    #[arg(long)]
    min_len: Option<usize>,
    /// A partition report or a bare robust partition.
    #[arg(long)]
    partition: Option<PathBuf>,
    /// A spectral or cut-oracle report.
    #[arg(long)]
    cut: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Serialize)]
struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct VerifyReport {
    pass: bool,
    checks: Vec<Check>,
}

fn check(name: &'static str, pass: bool, detail: impl Into<String>) -> Check {
    Check { name, pass, detail: detail.into() }
}

pub(crate) fn run(args: &VerifyArgs) -> anyhow::Result<ExitCode> {
    let artifacts = [&args.cycle, &args.partition, &args.cut].map(|p| p.as_ref().map(|p| read_json(p)).transpose());
    let [cycle, partition, cut] = artifacts;
    let (cycle, partition, cut) = (cycle?, partition?, cut?);
    let file = open_output(args.out.output.as_deref())?;
    let g = read_graph(&args.graph)?;

    let mut checks = vec![check("graph", true, format!("{} vertices, {} edges", g.n(), g.edge_count()))];
    if args.regular {
        checks.push(match g.regular_degree() {
            Some(d) => check("regular", true, format!("{d}-regular")),
            None => check("regular", false, format!("degrees range from {} upward", g.min_degree())),
        });
    }
    if let Some(v) = &cycle {
        checks.push(check_cycle(&g, v, args.min_len)?);
    }
    if let Some(v) = &partition {
        checks.push(check_partition(&g, v)?);
    }
    if let Some(v) = &cut {
        checks.push(check_cut(&g, v)?);
    }

    let report = VerifyReport { pass: checks.iter().all(|c| c.pass), checks };
    let v = envelope(&report)?;
    emit(&v, &args.out, file, || {
        let mut s = String::new();
        for c in &report.checks {
            s.push_str(&format!("{:<10} {}  {}\n", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail));
        }
        s.push_str(if report.pass { "result: pass" } else { "result: fail" });
        s
    })?;
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn check_cycle(g: &Graph, v: &Value, min_len: Option<usize>) -> anyhow::Result<Check> {
    let (cycle, recorded_min) = match v {
        Value::Array(_) => (serde_json::from_value::<Cycle>(v.clone())?, 3),
        Value::Object(map) if map.contains_key("verdict") => {
            let report: DecisionReport = serde_json::from_value(v.clone()).context("reading decision report")?;
            let threshold = g.n().saturating_sub(report.c_used);
            match (report.verdict, report.certificate) {
                (_, Some(c)) => (c, threshold),
                (Verdict::Yes, None) => return Ok(check("cycle", true, "yes verdict without certificate; nothing to check")),
                (Verdict::No, None) => return Ok(check("cycle", true, "no verdict; nothing to check")),
            }
        }
        Value::Object(map) if map.contains_key("cycle") => {
            let cycle: Cycle = serde_json::from_value(map["cycle"].clone())?;
            if cycle.is_empty() {
                return Ok(match g.n() {
                    0 => check("cycle", true, "empty graph"),
                    _ => check("cycle", true, "oracle reported no cycle"),
                });
            }
            let len = cycle.len();
            (cycle, len)
        }
        _ => bail!(usage("unrecognized cycle artifact")),
    };
    let min = min_len.unwrap_or(recorded_min);
    let ok = verify_cycle(g, &cycle, min);
    Ok(check("cycle", ok, format!("{} vertices, required at least {min}", cycle.len())))
}

fn check_partition(g: &Graph, v: &Value) -> anyhow::Result<Check> {
    let body = v.get("partition").unwrap_or(v);
    let rp: RobustPartition = serde_json::from_value(body.clone()).context("reading robust partition")?;
    let result = check_robust_partition(g, &rp);
    let detail = if result.ok() {
        format!("{} parts, all conditions hold", rp.part_count())
    } else {
        result.failures.join("; ")
    };
    Ok(check("partition", result.ok(), detail))
}

fn counts_match(name: &'static str, got: rcycle::Result<(usize, usize)>, want: (usize, usize)) -> Check {
    match got {
        Ok(got) if got == want => check(name, true, format!("{}/{} recomputed", got.0, got.1)),
        Ok(got) => check(name, false, format!("recorded {}/{}, recomputed {}/{}", want.0, want.1, got.0, got.1)),
        Err(e) => check(name, false, e.to_string()),
    }
}

fn field(v: &Value, key: &str) -> anyhow::Result<usize> {
    v.get(key).and_then(Value::as_u64).map(|x| x as usize).ok_or_else(|| usage(format!("artifact lacks integer field {key:?}")).into())
}

fn check_cut(g: &Graph, v: &Value) -> anyhow::Result<Check> {
    let body = v.get("result").unwrap_or(v);
    if let Some(set) = body.get("set") {
        let set: VertexSet = serde_json::from_value(set.clone())?;
        return Ok(counts_match("cut", conductance_counts(g, &set), (field(body, "boundary")?, field(body, "min_volume")?)));
    }
    if let Some(labels) = body.get("labels") {
        let labels: Vec<i8> = serde_json::from_value(labels.clone())?;
        return Ok(counts_match("cut", beta_counts(g, &labels), (field(body, "penalty")?, field(body, "labeled_volume")?)));
    }
    if let Some(w) = body.get("witness") {
        let want = (field(body, "numerator")?, field(body, "denominator")?);
        if let Some(set) = w.get("set") {
            let set: VertexSet = serde_json::from_value(set.clone())?;
            return Ok(counts_match("cut", conductance_counts(g, &set), want));
        }
        if let Some(labels) = w.get("labels") {
            let labels: Vec<i8> = serde_json::from_value(labels.clone())?;
            return Ok(counts_match("cut", beta_counts(g, &labels), want));
        }
    }
    if let (Some(value), Some(vector)) = (body.get("value").and_then(Value::as_f64), body.get("vector")) {
        let x: Vec<f64> = serde_json::from_value(vector.clone())?;
        let recorded = body.get("residual").and_then(Value::as_f64).unwrap_or(0.0);
        return Ok(check_eigenpair(g, value, &x, recorded));
    }
    bail!(usage("unrecognized cut artifact"))
}

/// Recomputes `|Lx - λx|` for the normalized Laplacian.
fn check_eigenpair(g: &Graph, value: f64, x: &[f64], recorded: f64) -> Check {
    if x.len() != g.n() || (0..g.n()).any(|v| g.degree(v) == 0) {
        return check("eigenpair", false, "vector length or isolated vertex mismatch");
    }
    let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm.is_nan() || norm <= 0.0 {
        return check("eigenpair", false, "zero vector");
    }
    let inv_sqrt: Vec<f64> = (0..g.n()).map(|v| 1.0 / (g.degree(v) as f64).sqrt()).collect();
    let residual = (0..g.n())
        .map(|v| {
            let ax: f64 = g.neighbors(v).iter().map(|&w| inv_sqrt[w] * x[w]).sum::<f64>() * inv_sqrt[v];
            let r = x[v] - ax - value * x[v];
            r * r
        })
        .sum::<f64>()
        .sqrt()
        / norm;
    let bound = (10.0 * recorded).max(1e-7);
    check("eigenpair", residual <= bound, format!("residual {residual:.2e}, allowed {bound:.2e}"))
}
