use std::process::Command;

use maclane_surfaces::cli::run_args;
use maclane_surfaces::graph::DualGraph;
use maclane_surfaces::resolve::ResolutionState;
use maclane_surfaces::valuation::InductiveValuation;
use maclane_surfaces::wildquot::ChartDescriptor;
use serde_json::Value;

const EXAMPLE: [&str; 6] = ["--p", "3", "--phi", "x^3-3*x^2+3", "--m", "2"];

fn run(args: &[&str]) -> (i32, String, String) {
    let out = run_args(std::iter::once("maclane-surfaces").chain(args.iter().copied()));
    (out.code, out.stdout, out.stderr)
}

fn with_example(cmd: &str, extra: &[&str]) -> Vec<String> {
    let mut v = vec![cmd.to_string()];
    v.extend(EXAMPLE.iter().map(|s| s.to_string()));
    v.extend(extra.iter().map(|s| s.to_string()));
    v
}

fn run_example(cmd: &str, extra: &[&str]) -> (i32, String, String) {
    let args = with_example(cmd, extra);
    run(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn chart_descriptor_round_trips() {
    let (code, out, _) = run_example("chart", &[]);
    assert_eq!(code, 0);
    let desc: ChartDescriptor = serde_json::from_str(&out).unwrap();
    let (data, pres) = desc.parse().unwrap();
    assert_eq!(data.m(), 2);
    assert_eq!(pres.minors.len(), 3);
}

#[test]
fn relations_verify() {
    let (code, out, _) = run_example("verify-relations", &["--samples", "3"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["ok"], true);
}

#[test]
fn resolution_json_reloads() {
    let (code, out, _) = run_example("resolve", &[]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["blowups"], 3);
    let st = ResolutionState::from_json(&v).unwrap();
    assert_eq!(st.blowup_count(), 3);
}

#[test]
fn graph_json_and_dot() {
    let (code, out, _) = run_example("graph", &[]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["consistent"], true);
    assert_eq!(v["negative_definite"], true);
    let g = DualGraph::from_json(&v).unwrap();
    assert_eq!(g.vertices.len(), 7);
    assert_eq!(g.edges.len(), 6);

    let (code, dot, _) = run_example("graph", &["--format", "dot"]);
    assert_eq!(code, 0);
    assert!(dot.starts_with("graph"));
    assert_eq!(dot.matches(" -- ").count(), 6);
}

#[test]
fn valuation_table_parses() {
    let (code, out, _) = run_example("valuations", &[]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["bijection"], true);
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 7);
    for c in comps {
        let val = &c["valuations"][0];
        let parsed: InductiveValuation = val["valuation"].as_str().unwrap().parse().unwrap();
        assert_eq!(parsed.ramification_index(), val["multiplicity"].as_u64().unwrap());
    }
}

#[test]
fn valuations_outside_the_example_are_rejected() {
    let (code, _, err) = run(&["valuations", "--p", "2", "--phi", "x^2+2", "--m", "3"]);
    assert_eq!(code, 2, "{err}");
}

#[test]
fn prediction_text() {
    let (code, out, _) = run(&["predict", "--p", "5", "--m", "2", "--format", "text"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "chain A1..A9 with C0 on A5");
}

#[test]
fn exit_codes() {
    assert_eq!(run_example("resolve", &["--cap", "1"]).0, 1);
    assert_eq!(run(&["chart", "--p", "3", "--phi", "x^3-3*x^2+", "--m", "2"]).0, 2);
    assert_eq!(run(&["chart", "--p", "4", "--phi", "x^2+2", "--m", "2"]).0, 2);
    assert_eq!(run(&["chart", "--p", "3", "--phi", "x^3+x+3", "--m", "2"]).0, 2);
    assert_eq!(run(&["chart", "--p", "5", "--phi", "x^5+5*x+5"]).0, 2);
    assert_eq!(run(&["no-such-command"]).0, 2);
}

#[test]
fn break_is_computed_when_omitted() {
    let (code, out, _) = run(&["chart", "--p", "3", "--phi", "x^3-3*x^2+3"]);
    assert_eq!(code, 0);
    let v: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["m"], 2);
    assert_eq!(v["m_source"], "computed");
}

#[test]
fn output_is_deterministic() {
    for cmd in ["chart", "verify-relations", "resolve", "graph"] {
        assert_eq!(run_example(cmd, &["--seed", "7"]).1, run_example(cmd, &["--seed", "7"]).1);
    }
}

#[test]
fn output_flag_writes_the_file() {
    let path = std::env::temp_dir().join(format!("maclane-graph-{}.dot", std::process::id()));
    let p = path.to_str().unwrap();
    let (code, _, _) = run_example("graph", &["--format", "dot", "--output", p]);
    assert_eq!(code, 0);
    let written = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert_eq!(written, run_example("graph", &["--format", "dot"]).1);
}

#[test]
fn binary_reports_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_maclane-surfaces");
    let ok = Command::new(bin).args(["predict", "--p", "3", "--m", "2"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["attach_at"], 3);
    let bad = Command::new(bin).args(["chart", "--p", "3", "--phi", "x^3+"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
}
