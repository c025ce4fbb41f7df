//! End-to-end checks of the `crossworld` binary: exit codes, output shapes,
//! and fixture emission.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_crossworld"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

/// Emit the embedded fixtures into a scratch directory and return it.
fn fixture_dir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("crossworld-cli-{}", std::process::id()));
    let out = run(&["examples", "--emit-fixtures", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    dir
}

fn fixture(dir: &Path, name: &str) -> String {
    dir.join(format!("{name}.json"))
        .to_str()
        .unwrap()
        .to_owned()
}

#[test]
fn validate_accepts_fixtures_and_rejects_garbage() {
    let dir = fixture_dir();
    for name in ["fig1", "fig2", "fig3", "fig4", "fig5"] {
        let out = run(&["validate", &fixture(&dir, name)]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        assert_eq!(stdout(&out), "valid\n");
    }

    let bad = dir.join("bad.json");
    std::fs::write(
        &bad,
        r#"{"exogenous":[{"name":"U","domain":["0","1"],"marginal":["1/2","1/3"]}],"endogenous":[]}"#,
    )
    .unwrap();
    let out = run(&["validate", bad.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["valid"], serde_json::Value::Bool(false));
    assert!(doc["violations"][0]
        .as_str()
        .unwrap()
        .contains("not normalized"));
}

#[test]
fn dsep_prints_verdicts_and_maps_exit_codes() {
    let dir = fixture_dir();
    let fig2 = fixture(&dir, "fig2");

    let sep = run(&[
        "dsep",
        &fig2,
        "A",
        "D@do(A=1)",
        "--world",
        "teleporter",
        "--do",
        "A=1",
        "--given",
        "B",
    ]);
    assert_eq!(sep.status.code(), Some(0));
    assert_eq!(stdout(&sep), "SEPARATED\n");

    let con = run(&[
        "dsep",
        &fig2,
        "A",
        "D@do(A=1)",
        "--world",
        "twin",
        "--do",
        "A=1",
        "--given",
        "B",
        "--json",
    ]);
    assert_eq!(con.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&con)).unwrap();
    assert_eq!(doc["separated"], serde_json::Value::Bool(false));
    assert_eq!(
        doc["witness"].as_str().unwrap(),
        "A <- C <- U -> C_do_A=1 -> B_do_A=1 -> D_do_A=1"
    );

    // Usage problems exit 2: endpoint in the conditioning set, missing
    // --do, mismatched counterfactual address, unknown flag.
    let usage = run(&[
        "dsep",
        &fig2,
        "A",
        "D@do(A=1)",
        "--world",
        "teleporter",
        "--do",
        "A=1",
        "--given",
        "A",
    ]);
    assert_eq!(usage.status.code(), Some(2));
    let missing = run(&["dsep", &fig2, "A", "D@do(A=1)", "--world", "teleporter"]);
    assert_eq!(missing.status.code(), Some(2));
    let mismatch = run(&[
        "dsep",
        &fig2,
        "A",
        "D@do(A=0)",
        "--world",
        "teleporter",
        "--do",
        "A=1",
    ]);
    assert_eq!(mismatch.status.code(), Some(2));
    let unknown_flag = run(&["dsep", &fig2, "A", "B", "--frobnicate"]);
    assert_eq!(unknown_flag.status.code(), Some(2));

    // Domain problems exit 1: unknown variable.
    let domain = run(&[
        "dsep",
        &fig2,
        "A",
        "Q",
        "--world",
        "teleporter",
        "--do",
        "A=1",
    ]);
    assert_eq!(domain.status.code(), Some(1));
}

#[test]
fn query_reports_exact_probability_and_check_agreement() {
    let dir = fixture_dir();
    let fig4 = fixture(&dir, "fig4");

    let out = run(&[
        "query",
        &fig4,
        "--do",
        "X=1",
        "--target",
        "Y=1",
        "--evidence",
        "W=1",
        "--method",
        "adjust:T",
        "--check",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["probability"].as_str().unwrap(), "109/224");
    assert_eq!(doc["target"].as_str().unwrap(), "Y_do_X=1=1");
    let methods: Vec<&str> = doc["methods"]
        .as_array()
        .unwrap()
        .iter()
        .map(|m| m.as_str().unwrap())
        .collect();
    assert_eq!(methods, ["adjust:T", "enumerate", "abduction"]);

    // Inadmissible adjustment set: domain error with a witness path.
    let inadmissible = run(&[
        "query",
        &fig4,
        "--do",
        "X=1",
        "--target",
        "Y=1",
        "--evidence",
        "W=1",
        "--method",
        "adjust:",
    ]);
    assert_eq!(inadmissible.status.code(), Some(1));
    assert!(stderr(&inadmissible).contains("not admissible"));

    // Impossible evidence: distinct domain error.
    let fig2 = fixture(&dir, "fig2");
    let zero = run(&[
        "query",
        &fig2,
        "--do",
        "A=1",
        "--target",
        "D=1",
        "--evidence",
        "A=1,B=1",
        "--method",
        "abduction",
    ]);
    assert_eq!(zero.status.code(), Some(1));
    assert!(stderr(&zero).contains("zero probability"));

    // Unknown method name is a usage error.
    let bad_method = run(&[
        "query", &fig2, "--do", "A=1", "--target", "D=1", "--method", "magic",
    ]);
    assert_eq!(bad_method.status.code(), Some(2));
}

#[test]
fn build_emits_dot_and_json() {
    let dir = fixture_dir();
    let fig1 = fixture(&dir, "fig1");

    let dot = run(&[
        "build",
        &fig1,
        "--world",
        "teleporter",
        "--do",
        "X=1",
        "--given",
        "Z",
    ]);
    assert_eq!(dot.status.code(), Some(0));
    let text = stdout(&dot);
    assert!(text.starts_with("digraph crossworld {"));
    assert!(text.contains("\"Y_do_X=1\""));
    assert!(text.contains("fillcolor=\"grey\""));

    let out_file = dir.join("fig1.dot");
    let to_file = run(&[
        "build",
        &fig1,
        "--world",
        "real",
        "--out",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(to_file.status.code(), Some(0));
    assert!(std::fs::read_to_string(&out_file)
        .unwrap()
        .starts_with("digraph causal {"));

    let js = run(&[
        "build", &fig1, "--world", "twin", "--do", "X=1", "--emit", "json",
    ]);
    assert_eq!(js.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&js)).unwrap();
    assert_eq!(doc["nodes"].as_array().unwrap().len(), 9);
    assert_eq!(doc["edges"].as_array().unwrap().len(), 10);

    // --do together with --world real is a usage error.
    let usage = run(&["build", &fig1, "--world", "real", "--do", "X=1"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn compare_shows_all_three_verdicts() {
    let dir = fixture_dir();
    let fig2 = fixture(&dir, "fig2");
    let out = run(&[
        "compare",
        &fig2,
        "A",
        "D@do(A=1)",
        "--do",
        "A=1",
        "--given",
        "B",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["twin"].as_str().unwrap(), "CONNECTED");
    assert_eq!(doc["teleporter"].as_str().unwrap(), "SEPARATED");
    assert_eq!(doc["oracle"].as_str().unwrap(), "independent");
}

#[test]
fn emitted_fixtures_match_the_embedded_sources() {
    let dir = fixture_dir();
    for name in ["fig1", "fig2", "fig3", "fig4", "fig5"] {
        let written = std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap();
        assert!(!written.is_empty());
        // Emitted files immediately validate.
        let out = run(&["validate", &fixture(&dir, name)]);
        assert!(out.status.success());
    }
}

#[test]
fn trials_default_run_is_clean_and_summary_only_is_one_line() {
    let out = run(&[
        "trials",
        "--seed",
        "11",
        "--models",
        "10",
        "--queries",
        "2",
        "--summary-only",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 1);
    let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(doc["teleporter_soundness_violations"], 0);
}
