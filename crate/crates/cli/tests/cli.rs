use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn algebra() -> PathBuf {
    root().join("fixtures/algebra.hl")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lemmata"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn json_of(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn assert_schema(name: &str, v: &Value) {
    let path = root().join(format!("docs/schemas/{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::options()
        .with_draft(jsonschema::Draft::Draft202012)
        .compile(&schema)
        .unwrap_or_else(|e| panic!("{name}: {e}"));
    if let Err(errors) = compiled.validate(v) {
        let msgs: Vec<String> = errors.map(|e| format!("{e} at {}", e.instance_path)).collect();
        panic!("{name} schema violations: {msgs:#?}");
    };
}

fn write_tmp(dir: &tempfile::TempDir, name: &str, src: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, src).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn algebra_checks_cleanly() {
    let o = run(&["check", s(&algebra()), "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json_of(&o);
    assert_schema("check", &v);
    assert_eq!(v["ok"], true);
    assert_eq!(v["cycles"]["status"], "acyclic");
    let goals = v["goals"].as_array().unwrap();
    let names: Vec<&str> = goals.iter().map(|g| g["name"].as_str().unwrap()).collect();
    assert_eq!(names, ["monoid_z", "semiring_z", "add_comm_group_z", "has_mul_z"]);
    assert!(goals.iter().all(|g| g["proved"] == true && g["verdict"]["verdict"] == "accepted"));
}

#[test]
fn algebra_checks_under_bidir() {
    let o = run(&["check", s(&algebra()), "--strategy", "bidir"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn algebra_lints_without_findings() {
    let o = run(&["lint", s(&algebra()), "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_schema("lint", &v);
    assert_eq!(v.as_array().unwrap().len(), 0);
}

#[test]
fn self_loop_instance_fails_with_cycle() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "loop.hl", "/-- c -/\nclass c (a)\n/-- loop -/\ninstance c_loop : c a <- c a\n");
    let o = run(&["check", s(&f), "--json"]);
    assert_eq!(code(&o), 1);
    let v = json_of(&o);
    assert_schema("check", &v);
    assert_eq!(v["ok"], false);
    assert_eq!(v["cycles"]["status"], "cycles");
    assert_eq!(v["cycles"]["cycles"][0][0], "c");
    let text = stdout(&run(&["check", s(&f)]));
    assert!(text.contains("error[cycle]"), "{text}");
}

#[test]
fn empty_file_is_fine() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "empty.hl", "");
    let o = run(&["check", s(&f), "--json"]);
    assert_eq!(code(&o), 0);
    assert_schema("check", &json_of(&o));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "bad.hl", "sort Z\nclass (\n");
    let o = run(&["check", s(&f), "--json"]);
    assert_eq!(code(&o), 2);
    let v = json_of(&o);
    assert_schema("error", &v);
    assert_eq!(v["error"]["kind"], "syntax");
    assert_eq!(v["error"]["line"], 2);
    let o = run(&["lint", "/nonexistent/file.hl"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["prove", "--tactic", "no_such_tactic", "x = x"])), 2);
    assert_eq!(code(&run(&["bench", "--shape", "torus", "--n", "3"])), 2);
    assert_eq!(code(&run(&["check", s(&algebra()), "--strategy", "sideways"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn failing_goal_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "f.hl", "goal wrong : 3 < 2 by norm_num\n");
    let o = run(&["check", s(&f), "--json"]);
    assert_eq!(code(&o), 1);
    let v = json_of(&o);
    assert_schema("check", &v);
    assert_eq!(v["goals"][0]["proved"], false);
}

#[test]
fn strict_turns_loop_risk_into_failure() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_tmp(&dir, "r.hl", "/-- grows -/\nsimp lemma grow (x : a) : x * 1 = x * 1 * 1\n");
    assert_eq!(code(&run(&["check", s(&f)])), 0);
    let o = run(&["check", s(&f), "--strict", "--json"]);
    assert_eq!(code(&o), 1);
    let v = json_of(&o);
    assert_eq!(v["lint"][0]["check"], "simp_loop_risk");
    assert_eq!(v["lint"][0]["severity"], "error");
}

#[test]
fn prove_norm_num_and_verify_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.json");
    let o = run(&["prove", "--tactic", "norm_num", "1 + 2 < 4", "--trace", s(&trace), "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_schema("prove", &json_of(&o));
    let tr: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    assert_schema("trace", &tr);
    assert_eq!(tr["schema"], 1);
    let o = run(&["verify", s(&trace), "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_schema("verify", &v);
    assert_eq!(v["verdict"], "accepted");
}

#[test]
fn tampered_trace_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("t.json");
    let rules = write_tmp(&dir, "r.hl", "simp lemma mul_one' (x : a) : x * 1 = x\n");
    let o = run(&["prove", "--tactic", "simp", "(a * 1) * 1", s(&rules), "--trace", s(&trace)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_eq!(stdout(&o).trim(), "a");
    assert_eq!(code(&run(&["verify", s(&trace), s(&rules)])), 0);
    // Without the file the rule is unknown to the checker.
    let o = run(&["verify", s(&trace), "--json"]);
    assert_eq!(code(&o), 1);
    assert_eq!(json_of(&o)["verdict"], "rejected");
    let mut tr: Value = serde_json::from_str(&std::fs::read_to_string(&trace).unwrap()).unwrap();
    tr["steps"][0]["position"] = serde_json::json!([1]);
    std::fs::write(&trace, tr.to_string()).unwrap();
    assert_eq!(code(&run(&["verify", s(&trace), s(&rules)])), 1);
}

#[test]
fn prove_linarith_reports_certificates() {
    let o = run(&[
        "prove", "--tactic", "linarith", "--hyp", "a <= b", "--hyp", "b <= c", "a <= c", "--json",
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = json_of(&o);
    assert_schema("prove", &v);
    let certs = v["certificates"].as_array().unwrap();
    assert_eq!(certs.len(), 1);
    assert_eq!(certs[0]["multipliers"], serde_json::json!(["1", "1", "1"]));
    assert_eq!(certs[0]["combined"], "0 < 0");
}

#[test]
fn prove_reports_counterexample() {
    let o = run(&["prove", "--tactic", "linarith", "--hyp", "2 * x >= 1", "x >= 1"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("counterexample x = 3/4"), "{}", stdout(&o));
    assert_eq!(code(&run(&["prove", "--tactic", "omega", "--hyp", "2 * x >= 1", "x >= 1"])), 0);
}

#[test]
fn prove_ring_and_dec_trivial() {
    let o = run(&["prove", "--tactic", "ring", "(x + y) * (x - y) = x ^ 2 - y ^ 2", "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_schema("prove", &json_of(&o));
    let o = run(&["prove", "--tactic", "dec_trivial", "forall x < 3, x * x < 9", "--sort", "nat", "--json"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert_schema("prove", &json_of(&o));
    assert_eq!(code(&run(&["prove", "--tactic", "dec_trivial", "forall x < 4, x * x < 9", "--sort", "nat"])), 1);
}

#[test]
fn prove_class_with_metrics() {
    for strategy in ["backward", "bidir"] {
        let o = run(&["prove", "--class", "monoid(Z)", s(&algebra()), "--strategy", strategy, "--stats", "json"]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        let v = json_of(&o);
        assert_schema("metrics", &v);
        assert_eq!(v["outcome"], "success");
    }
}

#[test]
fn bench_emits_rows() {
    let o = run(&["bench", "--shape", "diamond-ladder", "--n", "2..4", "--strategy", "backward,bidir"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "shape,n,strategy,classes,rules,outcome,nodes_expanded,cache_hits,max_depth_reached,elapsed_ns"
    );
    assert_eq!(lines.count(), 6);
    let o = run(&["bench", "--shape", "chain", "--n", "3", "--format", "json"]);
    let v = json_of(&o);
    assert_schema("bench", &v);
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn stats_of_algebra() {
    let o = run(&["stats", s(&algebra()), "--json"]);
    assert_eq!(code(&o), 0);
    let v = json_of(&o);
    assert_schema("stats", &v);
    assert_eq!(v["stats"]["class_count"], 65);
    assert_eq!(v["stats"]["class_to_class_count"], 93);
    assert!(!v["diamonds"].as_array().unwrap().is_empty());
}

#[test]
fn generated_files_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["gen", "--shape", "diamond-ladder", "--n", "3", "--json"]);
    assert_schema("gen", &json_of(&o));
    for (args, expect) in [
        (vec!["--shape", "chain", "--n", "4"], 0),
        (vec!["--shape", "diamond-ladder", "--n", "3"], 1),
        (vec!["--shape", "diamond-ladder", "--n", "3", "--with-fact"], 0),
    ] {
        let mut full = vec!["gen"];
        full.extend(&args);
        let src = stdout(&run(&full));
        let f = write_tmp(&dir, "g.hl", &src);
        assert_eq!(code(&run(&["check", s(&f)])), expect, "{args:?}");
    }
}

#[test]
fn grammar_examples_parse() {
    let doc = std::fs::read_to_string(root().join("docs/grammar.md")).unwrap();
    let blocks: Vec<&str> = doc
        .split("```hl\n")
        .skip(1)
        .map(|b| b.split("```").next().unwrap())
        .collect();
    assert_eq!(blocks.len(), 10);
    for b in blocks {
        let env = lemmata::env::Env::parse(b).unwrap_or_else(|e| panic!("{e}\n{b}"));
        for g in &env.goals {
            let r = lemmata::tactic::run_goal(g, &env, &Default::default());
            assert!(r.proved, "{}: {}", r.name, r.message);
        }
    }
}

#[test]
fn output_is_deterministic() {
    let a = run(&["check", s(&algebra())]);
    let b = run(&["check", s(&algebra())]);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(code(&a), code(&b));
}
