//! `rcycle` command-line front end.
//!
//! Exit codes: 0 for a yes verdict or a passing check, 1 for a no verdict or a
//! failing check, 2 for any error. Errors are written to stderr as a single
//! JSON object.

mod bench;
mod verify;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use rcycle::generators::{self, CorpusSpec};
use rcycle::oracles::{self, CutKind};
use rcycle::partition::check_robust_partition;
use rcycle::spectral::{self, SolverOptions, Which};
use rcycle::{decompose, parse_graph, DecideOptions, Graph, HierarchyConfig, HierarchyOptions, Param, Verdict, VertexSet};

pub(crate) const SCHEMA: &str = "rcycle/1";

#[derive(Parser)]
#[command(name = "rcycle", version, about = "Long-cycle decisions on dense regular graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether the graph has a cycle on at least n - c vertices.
    Decide(DecideArgs),
    /// Compute a robust partition.
    Partition(PartitionArgs),
    /// Extreme eigenvalues and sweep roundings.
    Spectral(SpectralArgs),
    /// Exhaustive reference computations on small graphs.
    Oracle(OracleArgs),
    /// Write a generated graph in edge-list format.
    Gen(GenArgs),
    /// Re-check serialized artifacts against a graph.
    Verify(verify::VerifyArgs),
    /// Compare pipeline verdicts with the exhaustive oracle over a corpus.
    Bench(bench::BenchArgs),
}

#[derive(Args, Clone)]
pub(crate) struct Output {
    /// Print the JSON report instead of a summary.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Clone)]
pub(crate) struct HierarchyArgs {
    #[arg(long, default_value_t = 0.01)]
    f_scale: f64,
    #[arg(long, default_value_t = 3.0)]
    f_exponent: f64,
    #[arg(long, default_value_t = 24)]
    n0: usize,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    beta_stop: Option<f64>,
    /// Eigensolver residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Largest part size checked exhaustively by the recognizer.
    #[arg(long, default_value_t = 18)]
    brute_cap: usize,
}

impl HierarchyArgs {
    pub(crate) fn options(&self, seed: u64) -> anyhow::Result<HierarchyOptions> {
        for (name, v) in [("f-scale", self.f_scale), ("f-exponent", self.f_exponent), ("tol", self.tol)] {
            if !(v.is_finite() && v > 0.0) {
                bail!(usage(format!("--{name} must be positive, got {v}")));
            }
        }
        if self.f_exponent <= 1.0 {
            bail!(usage(format!("--f-exponent must exceed 1, got {}", self.f_exponent)));
        }
        for (name, v) in [("phi", self.phi), ("beta-stop", self.beta_stop)] {
            if let Some(v) = v {
                if !(v > 0.0 && v < 1.0) {
                    bail!(usage(format!("--{name} must lie in (0, 1), got {v}")));
                }
            }
        }
        Ok(HierarchyOptions {
            f_scale: self.f_scale,
            f_exponent: self.f_exponent,
            n0: self.n0,
            tau: None,
            phi: self.phi,
            beta_stop: self.beta_stop,
            solver: SolverOptions { tol: self.tol, seed, ..SolverOptions::default() },
            brute_cap: self.brute_cap,
        })
    }
}

#[derive(Args)]
struct DecideArgs {
    #[arg(long)]
    input: PathBuf,
    /// Degree ratio: the graph must have degree at least alpha * n.
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    /// Use this c instead of ceil(100 / alpha^2).
    #[arg(long)]
    c_override: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run the partition pipeline even when the exhaustive route applies.
    #[arg(long)]
    force_pipeline: bool,
    /// Report the verdict without building a cycle.
    #[arg(long)]
    no_construct: bool,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[command(flatten)]
    hierarchy: HierarchyArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct PartitionArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    hierarchy: HierarchyArgs,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum SpectralKind {
    SecondSmallest,
    Lambdamax,
    Cheeger,
    Trevisan,
}

#[derive(Args)]
struct SpectralArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    which: SpectralKind,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000)]
    max_iter: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    LongestCycle,
    Conductance,
    Beta,
    RobustExpander,
    Connecting,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: OracleKind,
    /// Refuse graphs with more vertices than this.
    #[arg(long, default_value_t = 18)]
    cap: usize,
    /// Robust-neighbourhood threshold for robust-expander.
    #[arg(long)]
    nu: Option<f64>,
    /// Set-size window for robust-expander.
    #[arg(long)]
    tau: Option<f64>,
    /// JSON file holding the parts as an array of vertex arrays.
    #[arg(long)]
    parts: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct GenArgs {
    #[command(subcommand)]
    family: Family,
    /// Write the edge list here instead of stdout.
    #[arg(short = 'o', long = "output", global = true)]
    output: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Family {
    /// D-regular connected graph without a Hamilton cycle, built from k blocks.
    Jung {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
    },
    RandomRegular {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Two disjoint copies of K_{d+1}.
    TwoCliques {
        #[arg(long)]
        d: usize,
    },
    CompleteBipartite {
        #[arg(long)]
        a: usize,
        #[arg(long)]
        b: usize,
    },
    Clique {
        #[arg(long)]
        n: usize,
    },
    Crown {
        #[arg(long)]
        h: usize,
    },
    Petersen,
    /// Any corpus specification, given as JSON or as @file.
    Spec {
        #[arg(long)]
        spec: String,
    },
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a <= 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1], got {a}"))
    }
}

/// Marker for argument problems found after parsing.
#[derive(Debug)]
pub(crate) struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

pub(crate) fn usage(msg: impl Into<String>) -> Usage {
    Usage(msg.into())
}

pub(crate) fn read_graph(path: &Path) -> anyhow::Result<Graph> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

pub(crate) fn read_json(path: &Path) -> anyhow::Result<Value> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Opens the output file up front so an unwritable path fails before any work.
pub(crate) fn open_output(path: Option<&Path>) -> anyhow::Result<Option<File>> {
    path.map(|p| File::create(p).with_context(|| format!("opening {} for writing", p.display()))).transpose()
}

/// Serializes `body` as an object and stamps the schema field onto it.
pub(crate) fn envelope<T: Serialize>(body: &T) -> anyhow::Result<Value> {
    let mut v = serde_json::to_value(body)?;
    match v.as_object_mut() {
        Some(map) => {
            map.insert("schema".into(), Value::from(SCHEMA));
        }
        None => v = json!({ "schema": SCHEMA, "result": v }),
    }
    Ok(v)
}

/// Writes the report to the output file and either the JSON or the summary to stdout.
pub(crate) fn emit(report: &Value, out: &Output, file: Option<File>, summary: impl FnOnce() -> String) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(report)?;
    if let Some(mut f) = file {
        writeln!(f, "{text}")?;
    }
    let mut stdout = std::io::stdout().lock();
    if out.json {
        writeln!(stdout, "{text}")?;
    } else {
        writeln!(stdout, "{}", summary())?;
    }
    Ok(())
}

fn decide(args: &DecideArgs) -> anyhow::Result<ExitCode> {
    let hierarchy = args.hierarchy.options(args.seed)?;
    let file = open_output(args.out.output.as_deref())?;
    let g = read_graph(&args.input)?;
    let opts = DecideOptions {
        c_override: args.c_override,
        hierarchy,
        force_pipeline: args.force_pipeline,
        construct: !args.no_construct,
        seed: args.seed,
        restarts: args.restarts,
        ..DecideOptions::default()
    };
    let report = rcycle::decide_long_cycle(&g, args.alpha, &opts)?;
    let v = envelope(&report)?;
    emit(&v, &args.out, file, || {
        let verdict = match report.verdict {
            Verdict::Yes => "yes",
            Verdict::No => "no",
        };
        let mut s = format!("verdict: {verdict} (n = {}, c = {}, threshold {})", g.n(), report.c_used, g.n().saturating_sub(report.c_used));
        if let Some(c) = &report.certificate {
            s.push_str(&format!("\ncertificate: cycle on {} vertices", c.len()));
        }
        if let Some(o) = &report.obstruction {
            s.push_str(&format!("\nobstruction: {o}"));
        }
        for d in &report.diagnostics {
            s.push_str(&format!("\nnote: {d}"));
        }
        s
    })?;
    Ok(match report.verdict {
        Verdict::Yes => ExitCode::SUCCESS,
        Verdict::No => ExitCode::from(1),
    })
}

fn partition(args: &PartitionArgs) -> anyhow::Result<ExitCode> {
    let opts = args.hierarchy.options(args.seed)?;
    let cfg = HierarchyConfig::new(args.alpha, &opts)?;
    let file = open_output(args.out.output.as_deref())?;
    let g = read_graph(&args.input)?;
    let rp = decompose(&g, &cfg)?;
    let check = check_robust_partition(&g, &rp);
    let v = json!({ "schema": SCHEMA, "partition": rp, "check": check });
    emit(&v, &args.out, file, || {
        let mut s = format!("{} expander parts, {} bipartite parts; sizes {:?}", rp.expander_parts.len(), rp.bipartite_parts.len(), rp.sizes());
        s.push_str(&format!("\nchecks: {}", if check.ok() { "pass" } else { "fail" }));
        for f in &check.failures {
            s.push_str(&format!("\n  {f}"));
        }
        s
    })?;
    Ok(ExitCode::SUCCESS)
}

fn spectral_cmd(args: &SpectralArgs) -> anyhow::Result<ExitCode> {
    if !(args.tol.is_finite() && args.tol > 0.0) {
        bail!(usage(format!("--tol must be positive, got {}", args.tol)));
    }
    let file = open_output(args.out.output.as_deref())?;
    let g = read_graph(&args.input)?;
    let opts = SolverOptions { tol: args.tol, max_iter: args.max_iter, seed: args.seed };
    let (which, result, summary) = match args.which {
        SpectralKind::SecondSmallest => {
            let e = spectral::extreme_eigenpair(&g, Which::SecondSmallest, &opts)?;
            let s = format!("lambda_2 = {:.12} (residual {:.2e})", e.value, e.residual);
            ("second_smallest", serde_json::to_value(e)?, s)
        }
        SpectralKind::Lambdamax => {
            let e = spectral::extreme_eigenpair(&g, Which::Largest, &opts)?;
            let s = format!("lambda_max = {:.12} (residual {:.2e})", e.value, e.residual);
            ("lambdamax", serde_json::to_value(e)?, s)
        }
        SpectralKind::Cheeger => {
            let c = spectral::cheeger_sweep(&g, &opts)?;
            let s = format!("conductance {}/{} = {:.6} on {} vertices (lambda_2 = {:.6})", c.boundary, c.min_volume, c.conductance, c.set.len(), c.lambda2);
            ("cheeger", serde_json::to_value(c)?, s)
        }
        SpectralKind::Trevisan => {
            let b = spectral::bipartite_sweep(&g, &opts)?;
            let s = format!("beta {}/{} = {:.6} (lambda_max = {:.6})", b.penalty, b.labeled_volume, b.beta, b.lambda_max);
            ("trevisan", serde_json::to_value(b)?, s)
        }
    };
    let v = json!({ "schema": SCHEMA, "which": which, "result": result });
    emit(&v, &args.out, file, || summary)?;
    Ok(ExitCode::SUCCESS)
}

pub(crate) fn parse_parts(v: &Value) -> anyhow::Result<Vec<VertexSet>> {
    let raw: Vec<Vec<usize>> = serde_json::from_value(v.clone()).context("parts must be an array of vertex arrays")?;
    Ok(raw.into_iter().map(VertexSet::new).collect())
}

fn oracle(args: &OracleArgs) -> anyhow::Result<ExitCode> {
    let needs = |name: &str, v: Option<f64>| -> anyhow::Result<Param> {
        let v = v.ok_or_else(|| usage(format!("--{name} is required for this oracle")))?;
        Ok(Param::new(v)?)
    };
    let expander_params = match args.kind {
        OracleKind::RobustExpander => Some((needs("nu", args.nu)?, needs("tau", args.tau)?)),
        _ => None,
    };
    let parts = match (args.kind, &args.parts) {
        (OracleKind::Connecting, Some(p)) => Some(parse_parts(&read_json(p)?)?),
        (OracleKind::Connecting, None) => bail!(usage("--parts is required for the connecting oracle")),
        _ => None,
    };
    let file = open_output(args.out.output.as_deref())?;
    let g = read_graph(&args.input)?;
    let (v, summary) = match args.kind {
        OracleKind::LongestCycle => {
            let cycle = oracles::brute_longest_cycle_witness(&g, args.cap)?.unwrap_or_default();
            let s = format!("circumference {}", cycle.len());
            (json!({ "schema": SCHEMA, "kind": "longest_cycle", "length": cycle.len(), "cycle": cycle }), s)
        }
        OracleKind::Conductance | OracleKind::Beta => {
            let (name, kind) = match args.kind {
                OracleKind::Conductance => ("conductance", CutKind::Conductance),
                _ => ("beta", CutKind::Beta),
            };
            let cut = oracles::brute_extremal_cut(&g, kind, args.cap)?;
            let s = format!("{name} = {}/{} = {:.6}", cut.numerator, cut.denominator, cut.value);
            (json!({ "schema": SCHEMA, "kind": name, "result": cut }), s)
        }
        OracleKind::RobustExpander => {
            let (nu, tau) = expander_params.expect("validated above");
            let (ok, witness) = oracles::brute_is_robust_expander(&g, nu, tau, None, args.cap)?;
            let s = match &witness {
                None => "robust expander: yes".to_string(),
                Some(w) => format!("robust expander: no, witness {:?}", w.as_slice()),
            };
            (json!({ "schema": SCHEMA, "kind": "robust_expander", "is_robust_expander": ok, "witness": witness }), s)
        }
        OracleKind::Connecting => {
            let parts = parts.expect("validated above");
            let exists = oracles::brute_connecting_exists(&g, &parts, args.cap)?;
            (json!({ "schema": SCHEMA, "kind": "connecting", "exists": exists }), format!("connecting system exists: {exists}"))
        }
    };
    emit(&v, &args.out, file, || summary)?;
    Ok(ExitCode::SUCCESS)
}

fn gen(args: &GenArgs) -> anyhow::Result<ExitCode> {
    let spec = match &args.family {
        Family::Jung { k, d } => CorpusSpec::Jung { k: *k, d: *d },
        Family::RandomRegular { n, d, seed } => CorpusSpec::RandomRegular { n: *n, d: *d, seed: *seed },
        Family::TwoCliques { d } => CorpusSpec::TwoCliques { d: *d },
        Family::CompleteBipartite { a, b } => CorpusSpec::CompleteBipartite { a: *a, b: *b },
        Family::Clique { n } => CorpusSpec::Clique { n: *n },
        Family::Crown { h } => CorpusSpec::Crown { h: *h },
        Family::Petersen => CorpusSpec::Petersen,
        Family::Spec { spec } => {
            let text = match spec.strip_prefix('@') {
                Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
                None => spec.clone(),
            };
            serde_json::from_str(&text).context("parsing corpus specification")?
        }
    };
    let file = open_output(args.output.as_deref())?;
    let g = generators::gen_hardness_instance(&spec)?;
    let text = g.to_edge_list();
    match file {
        Some(mut f) => f.write_all(text.as_bytes())?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(ExitCode::SUCCESS)
}

/// Maps an error to the `kind` field of the JSON diagnostic.
fn error_kind(e: &anyhow::Error) -> &'static str {
    for cause in e.chain() {
        if let Some(err) = cause.downcast_ref::<rcycle::Error>() {
            return err.kind();
        }
        if cause.is::<Usage>() {
            return "usage";
        }
        if cause.is::<std::io::Error>() {
            return "io";
        }
        if cause.is::<serde_json::Error>() {
            return "json";
        }
    }
    "internal"
}

fn report_error(kind: &str, message: &str) -> ExitCode {
    let v = json!({ "schema": SCHEMA, "error": { "kind": kind, "message": message } });
    eprintln!("{v}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand) {
                e.exit();
            }
            return report_error("usage", e.render().to_string().trim());
        }
    };
    let result = match &cli.command {
        Command::Decide(a) => decide(a),
        Command::Partition(a) => partition(a),
        Command::Spectral(a) => spectral_cmd(a),
        Command::Oracle(a) => oracle(a),
        Command::Gen(a) => gen(a),
        Command::Verify(a) => verify::run(a),
        Command::Bench(a) => bench::run(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => report_error(error_kind(&e), &format!("{e:#}")),
    }
}
