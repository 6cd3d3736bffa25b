use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::atomic::{AtomicUsize, Ordering};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rcycle"))
}

fn scratch() -> PathBuf {
    static NEXT: AtomicUsize = AtomicUsize::new(0);
    let dir = std::env::temp_dir().join(format!("rcycle-cli-{}-{}", std::process::id(), NEXT.fetch_add(1, Ordering::Relaxed)));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|e| panic!("bad json ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

fn gen(dir: &Path, name: &str, family: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut args = vec!["gen"];
    args.extend_from_slice(family);
    args.extend_from_slice(&["-o", &path]);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).to_string_lossy().into_owned()
}

#[test]
fn decide_k12_says_yes() {
    let dir = scratch();
    let k12 = gen(&dir, "k12.txt", &["clique", "--n", "12"]);
    let o = run(&["decide", "--input", &k12, "--alpha", "0.9", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "rcycle/1");
    assert_eq!(v["verdict"], "yes");
}

#[test]
fn decide_two_cliques_says_no() {
    let dir = scratch();
    let g = gen(&dir, "t.txt", &["two-cliques", "--d", "4"]);
    let o = run(&["decide", "--input", &g, "--alpha", "0.4", "--c-override", "1", "--json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout_json(&o)["verdict"], "no");
}

#[test]
fn jung_graph_verifies_regular() {
    let dir = scratch();
    let j = gen(&dir, "j.txt", &["jung", "--k", "4", "--d", "8"]);
    let o = run(&["verify", "--graph", &j, "--regular", "--json"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout_json(&o)["pass"], true);
}

#[test]
fn irregular_graph_fails_regular_check() {
    let dir = scratch();
    let path = p(&dir, "path.txt");
    std::fs::write(&path, "p 3 2\n0 1\n1 2\n").unwrap();
    let o = run(&["verify", "--graph", &path, "--regular"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn lambdamax_of_c4_is_two() {
    let dir = scratch();
    let c4 = p(&dir, "c4.txt");
    std::fs::write(&c4, "p 4 4\n0 1\n1 2\n2 3\n3 0\n").unwrap();
    let o = run(&["spectral", "--input", &c4, "--which", "lambdamax", "--json"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["which"], "lambdamax");
    assert!((v["result"]["value"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn errors_are_json_with_exit_two() {
    let dir = scratch();
    let k = gen(&dir, "k.txt", &["clique", "--n", "5"]);
    let cases: [(Vec<&str>, &str); 4] = [
        (vec!["decide", "--input", &k, "--alpha", "1.5"], "usage"),
        (vec!["decide", "--input", "/nonexistent/g.txt", "--alpha", "0.5"], "io"),
        (vec!["oracle", "--input", &k, "--kind", "robust-expander"], "usage"),
        (vec!["gen", "random-regular", "--n", "5", "--d", "3"], "infeasible"),
    ];
    for (args, kind) in cases {
        let o = run(&args);
        assert_eq!(code(&o), 2, "{args:?}");
        let v = stderr_json(&o);
        assert_eq!(v["schema"], "rcycle/1");
        assert_eq!(v["error"]["kind"], kind, "{args:?}: {v}");
    }
    let bad = p(&dir, "bad.txt");
    std::fs::write(&bad, "p 2 1\n0 7\n").unwrap();
    let o = run(&["spectral", "--input", &bad, "--which", "cheeger"]);
    assert_eq!(code(&o), 2);
    assert_eq!(stderr_json(&o)["error"]["kind"], "parse");
}

#[test]
fn unwritable_output_fails_before_work() {
    let dir = scratch();
    let k = gen(&dir, "k.txt", &["clique", "--n", "6"]);
    let o = run(&["decide", "--input", &k, "--alpha", "0.8", "-o", "/nonexistent/dir/out.json"]);
    assert_eq!(code(&o), 2);
    assert!(o.stdout.is_empty());
}

#[test]
fn verify_accepts_emitted_artifacts() {
    let dir = scratch();
    let rr = gen(&dir, "rr.txt", &["random-regular", "--n", "30", "--d", "15", "--seed", "3"]);
    let out = |name: &str| p(&dir, name);

    let d = out("decide.json");
    assert_eq!(code(&run(&["decide", "--input", &rr, "--alpha", "0.5", "--c-override", "2", "--force-pipeline", "-o", &d])), 0);
    let part = out("partition.json");
    assert_eq!(code(&run(&["partition", "--input", &rr, "--alpha", "0.5", "-o", &part])), 0);
    let cheeger = out("cheeger.json");
    assert_eq!(code(&run(&["spectral", "--input", &rr, "--which", "cheeger", "-o", &cheeger])), 0);
    let trevisan = out("trevisan.json");
    assert_eq!(code(&run(&["spectral", "--input", &rr, "--which", "trevisan", "-o", &trevisan])), 0);
    let eig = out("eig.json");
    assert_eq!(code(&run(&["spectral", "--input", &rr, "--which", "second-smallest", "-o", &eig])), 0);

    for (flag, file) in [("--cycle", &d), ("--partition", &part), ("--cut", &cheeger), ("--cut", &trevisan), ("--cut", &eig)] {
        let o = run(&["verify", "--graph", &rr, flag, file, "--json"]);
        assert_eq!(code(&o), 0, "{flag} {file}: {}", String::from_utf8_lossy(&o.stdout));
    }

    let small = gen(&dir, "small.txt", &["complete-bipartite", "--a", "4", "--b", "4"]);
    for kind in ["longest-cycle", "conductance", "beta"] {
        let f = out(&format!("{kind}.json"));
        assert_eq!(code(&run(&["oracle", "--input", &small, "--kind", kind, "-o", &f])), 0);
        let flag = if kind == "longest-cycle" { "--cycle" } else { "--cut" };
        assert_eq!(code(&run(&["verify", "--graph", &small, flag, &f])), 0, "{kind}");
    }
}

#[test]
fn verify_rejects_tampered_cycle() {
    let dir = scratch();
    let k = gen(&dir, "k.txt", &["clique", "--n", "6"]);
    let f = p(&dir, "cycle.json");
    std::fs::write(&f, "[0, 1, 2, 1]").unwrap();
    assert_eq!(code(&run(&["verify", "--graph", &k, "--cycle", &f])), 1);
    std::fs::write(&f, "[0, 1, 2]").unwrap();
    assert_eq!(code(&run(&["verify", "--graph", &k, "--cycle", &f])), 0);
    assert_eq!(code(&run(&["verify", "--graph", &k, "--cycle", &f, "--min-len", "6"])), 1);
}

#[test]
fn decide_is_deterministic_apart_from_timings() {
    let dir = scratch();
    let rr = gen(&dir, "rr.txt", &["random-regular", "--n", "40", "--d", "20", "--seed", "9"]);
    let once = || {
        let o = run(&["decide", "--input", &rr, "--alpha", "0.5", "--c-override", "3", "--seed", "7", "--force-pipeline", "--json"]);
        assert_eq!(code(&o), 0);
        let mut v = stdout_json(&o);
        v.as_object_mut().unwrap().remove("timings_ms");
        v
    };
    assert_eq!(once(), once());
}

#[test]
fn gen_spec_matches_named_family() {
    let dir = scratch();
    let a = gen(&dir, "a.txt", &["spec", "--spec", r#"{"family":"two_cliques","d":3}"#]);
    let b = gen(&dir, "b.txt", &["two-cliques", "--d", "3"]);
    assert_eq!(std::fs::read_to_string(a).unwrap(), std::fs::read_to_string(b).unwrap());
}

#[test]
fn bench_reports_agreement_table() {
    let dir = scratch();
    let corpus = p(&dir, "corpus.json");
    std::fs::write(
        &corpus,
        r#"[
            {"spec": {"family": "two_cliques", "d": 3}, "c_override": 1},
            {"spec": {"family": "complete_bipartite", "a": 4, "b": 4}, "c_override": 1},
            {"spec": {"family": "random_regular", "n": 12, "d": 6, "seed": 1}, "c_override": 1}
        ]"#,
    )
    .unwrap();
    let o = run(&["bench", "--corpus", &corpus, "--threads", "2", "--json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let v = stdout_json(&o);
    assert_eq!(v["schema"], "rcycle/1");
    assert_eq!(v["agreed"], 3);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows[0]["verdict"], "no");
    assert_eq!(rows[1]["oracle_verdict"], "yes");
    assert!(rows.iter().all(|r| r["ms"].is_number() && r["agreement"] == true));
}
