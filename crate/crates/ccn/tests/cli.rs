use std::fs;
use std::path::{Path, PathBuf};

use ccn::cli::run;
use ccn::experiment::ExperimentResults;
use ccn::report::{AnalyzeReport, ColoringsReport, IsomorphismsReport, QuotientReport, Section, ValidateReport};

struct Output {
    code: i32,
    out: String,
    err: String,
}

fn ccn(args: &[&str]) -> Output {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("ccn").chain(args.iter().copied()), &mut out, &mut err);
    Output { code, out: String::from_utf8(out).unwrap(), err: String::from_utf8(err).unwrap() }
}

fn config(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

const FIG1_FIELD: &str = "
cells 1 { dx = [-self[0] + 0.3 * sum(magenta, u -> tanh(u)) + 0.2]; }
cells 2 { dx = -2 * self + sin(sum(blue, u -> u)); }
";

const BROKEN: &str = r#"{
  "version": 1,
  "cell_types": [{"id": "P", "dim": 1}],
  "arrow_types": ["e"],
  "cells": [{"id": "a", "type": "P"}],
  "arrows": [{"id": "x", "type": "e", "tail": "a", "head": "nowhere"}]
}"#;

#[test]
fn fig1_has_four_colorings() {
    let o = ccn(&["colorings", "--net", "fixture:fig1"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(o.out.starts_with("4 balanced coloring(s)"));
    assert!(o.out.contains("digraph finer_than"));

    let o = ccn(&["--format", "json", "colorings", "--net", "fixture:fig1"]);
    let refined: ColoringsReport = serde_json::from_str(&o.out).unwrap();
    let classes: Vec<&str> = refined.colorings.iter().map(|c| c.classes.as_str()).collect();
    assert_eq!(classes, ["{}", "{1⋈3}", "{2⋈4}", "{1⋈3, 2⋈4}"]);
    assert_eq!(refined.finer_than, [[0, 1], [0, 2], [1, 3], [2, 3]]);

    let o = ccn(&["--format", "json", "colorings", "--net", "fixture:fig1", "--brute-force"]);
    let brute: ColoringsReport = serde_json::from_str(&o.out).unwrap();
    assert_eq!(brute.colorings, refined.colorings);
    assert_eq!(brute.method, "brute-force");
}

#[test]
fn enumeration_cap_is_a_negative_verdict() {
    let o = ccn(&["colorings", "--net", "fixture:fig3", "--cap", "5"]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[too-many-cells]"), "{}", o.err);
}

#[test]
fn broken_network_fails_validation() {
    let dir = tempfile::tempdir().unwrap();
    let net = write(dir.path(), "broken.json", BROKEN);
    let o = ccn(&["validate", "--net", &net]);
    assert_eq!(o.code, 1);
    assert!(o.out.contains("unknown-endpoint"), "{}", o.out);

    let o = ccn(&["--format", "json", "validate", "--net", &net]);
    let report: ValidateReport = serde_json::from_str(&o.out).unwrap();
    assert!(!report.valid);
    assert_eq!(report.violations.len(), 1);

    let o = ccn(&["validate", "--net", "fixture:fig3"]);
    assert_eq!(o.code, 0);
    let o = ccn(&["colorings", "--net", &net]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[invalid-network]"), "{}", o.err);
}

#[test]
fn error_codes_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.json", "{ not json");
    let o = ccn(&["validate", "--net", &junk]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[malformed-json]"));

    let o = ccn(&["--format", "json", "validate", "--net", &junk]);
    let e: serde_json::Value = serde_json::from_str(o.err.trim()).unwrap();
    assert_eq!(e["error"]["code"], "malformed-json");
    assert_eq!(e["error"]["exit"], 1);

    let o = ccn(&["validate", "--net", "fixture:nope"]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[unknown-fixture]"));

    let missing = dir.path().join("missing.json").display().to_string();
    let o = ccn(&["validate", "--net", &missing]);
    assert_eq!(o.code, 3);
    assert!(o.err.starts_with("error[io]"));

    for args in [&["validate"][..], &["frobnicate"], &["--jobs", "0", "validate", "--net", "fixture:fig1"], &[]] {
        let o = ccn(args);
        assert_eq!(o.code, 2, "{args:?}");
        assert!(o.err.starts_with("error[usage]"));
    }

    let o = ccn(&["isomorphisms", "--net", "fixture:fig1", "--from", "9"]);
    assert_eq!(o.code, 2);
    assert!(o.err.starts_with("error[unknown-cell]"));

    let o = ccn(&["--help"]);
    assert_eq!(o.code, 0);
    assert!(o.out.contains("colorings"));
}

#[test]
fn isomorphisms_between_cells() {
    let o = ccn(&["--format", "json", "isomorphisms", "--net", "fixture:fig1", "--from", "1", "--to", "3"]);
    assert_eq!(o.code, 0);
    let report: IsomorphismsReport = serde_json::from_str(&o.out).unwrap();
    assert_eq!(report.sets.len(), 1);
    assert_eq!(report.sets[0].maps.len(), 2);

    let o = ccn(&["--format", "json", "isomorphisms", "--net", "fixture:fig1", "--from", "1", "--to", "2"]);
    let report: IsomorphismsReport = serde_json::from_str(&o.out).unwrap();
    assert!(report.sets[0].maps.is_empty());
}

#[test]
fn quotient_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let col = write(dir.path(), "col.json", r#"{"colors": {"1": "a", "2": "b", "3": "a", "4": "c"}}"#);
    let q = dir.path().join("q.json");
    let o = ccn(&["--format", "json", "quotient", "--net", "fixture:fig1", "--coloring", &col, "--out", q.to_str().unwrap()]);
    assert_eq!(o.code, 0, "{}", o.err);
    let report: QuotientReport = serde_json::from_str(&o.out).unwrap();
    assert_eq!(report.network.cells.len(), 3);
    assert_eq!(report.projection["1"], report.projection["3"]);

    let written = ccn::formats::load_network_spec(q.to_str().unwrap()).unwrap();
    assert_eq!(ccn::formats::NetworkFile::from_spec(&written), report.network);
    assert_eq!(ccn(&["validate", "--net", q.to_str().unwrap()]).code, 0);
    let o = ccn(&["--format", "json", "colorings", "--net", q.to_str().unwrap()]);
    let colorings: ColoringsReport = serde_json::from_str(&o.out).unwrap();
    assert!(!colorings.colorings.is_empty());

    let bad = write(dir.path(), "bad.json", r#"{"colors": {"1": 0, "2": 0, "3": 0, "4": 1}}"#);
    let o = ccn(&["quotient", "--net", "fixture:fig1", "--coloring", &bad]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[unbalanced]"), "{}", o.err);

    let partial = write(dir.path(), "partial.json", r#"{"colors": {"1": 0}}"#);
    let o = ccn(&["quotient", "--net", "fixture:fig1", "--coloring", &partial]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[bad-coloring]"), "{}", o.err);
}

fn simulate(dir: &Path, x0: &str, t1: &str) -> (PathBuf, PathBuf) {
    let field = write(dir, "field.ccn", FIG1_FIELD);
    let x0 = write(dir, "x0.json", x0);
    let (csv, cache, plot) = (dir.join("t.csv"), dir.join("t.bin"), dir.join("t.dat"));
    let o = ccn(&[
        "simulate",
        "--net",
        "fixture:fig1",
        "--field",
        &field,
        "--x0",
        &x0,
        "--t1",
        t1,
        "--samples",
        "200",
        "--out",
        csv.to_str().unwrap(),
        "--cache",
        cache.to_str().unwrap(),
        "--emit-plot-data",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(fs::read_to_string(&plot).unwrap().starts_with("# t 1[0] 2[0] 3[0] 4[0]"));
    (csv, cache)
}

fn analyze(traj: &Path, extra: &[&str]) -> AnalyzeReport {
    let mut args = vec!["--format", "json", "analyze", "--traj", traj.to_str().unwrap(), "--net", "fixture:fig1"];
    args.extend_from_slice(extra);
    let o = ccn(&args);
    assert_eq!(o.code, 0, "{}", o.err);
    serde_json::from_str(&o.out).unwrap()
}

#[test]
fn zero_shift_analysis_is_diagonal() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, cache) = simulate(dir.path(), r#"{"state": {"1": 1.5, "2": -1.0, "3": 1.5, "4": 0.7}}"#, "5");
    assert!(fs::read_to_string(&csv).unwrap().starts_with("t,1[0],2[0],3[0],4[0]\n"));
    assert!(fs::read(&cache).unwrap().starts_with(b"CCNT"));

    for traj in [&csv, &cache] {
        let report = analyze(traj, &["--theta", "0"]);
        assert_eq!(report.pattern.classes, "{1⋈3}");
        assert!(report.pattern.balanced);
        let Some(Section::Ok(phase)) = report.phase else { panic!("no phase section") };
        assert_eq!(phase.self_related, ["1", "2", "3", "4"]);
        assert_eq!(phase.pairs, [["1", "3"]]);
        assert!(!phase.non_generic);
    }
    assert_eq!(analyze(&cache, &[]).derivatives, "field");
    assert_eq!(analyze(&csv, &[]).derivatives, "finite-difference");

    let o = ccn(&["analyze", "--traj", csv.to_str().unwrap(), "--net", "fixture:fig1", "--theta", "0"]);
    assert_eq!(o.code, 0);
    assert!(o.out.contains("{1⋈3}"));
}

#[test]
fn csv_and_cache_hold_the_same_samples() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, cache) = simulate(dir.path(), r#"{"state": {"1": 0.2, "2": 0.1, "3": -0.4, "4": 0.7}}"#, "3");
    let net = ccn::formats::load_network("fixture:fig1").unwrap();
    let a = ccn::formats::load_trajectory(&net, &csv).unwrap();
    let b = ccn::formats::load_trajectory(&net, &cache).unwrap();
    assert_eq!(a.times(), b.times());
    assert_eq!(a.states(), b.states());
    assert_eq!(a.len(), 201);
}

#[test]
fn interval_flags_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, _) = simulate(dir.path(), r#"{"state": {"1": 0.2, "2": 0.1, "3": -0.4, "4": 0.7}}"#, "3");
    let traj = csv.to_str().unwrap();
    for extra in [&["--from", "2", "--to", "1"][..], &["--to", "9"], &["--theta", "10"], &["--theta", "-1"]] {
        let mut args = vec!["analyze", "--traj", traj, "--net", "fixture:fig1"];
        args.extend_from_slice(extra);
        let o = ccn(&args);
        assert_eq!(o.code, 2, "{extra:?}: {}", o.err);
        assert!(o.err.starts_with("error[bad-interval]"), "{}", o.err);
    }
    let o = ccn(&["analyze", "--traj", traj, "--net", "fixture:chain"]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[bad-trajectory]"), "{}", o.err);
}

#[test]
fn simulate_rejects_bad_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let field = write(dir.path(), "field.ccn", FIG1_FIELD);
    let x0 = write(dir.path(), "x0.json", r#"{"state": {"1": 0.2, "2": 0.1, "3": -0.4}}"#);
    let out = dir.path().join("t.csv");
    let o = ccn(&["simulate", "--net", "fixture:fig1", "--field", &field, "--x0", &x0, "--t1", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[bad-state]"), "{}", o.err);

    let bad_field = write(dir.path(), "bad.ccn", "cells 1 { dx = -self + nope; }");
    let x0 = write(dir.path(), "x1.json", r#"{"state": {"1": 0.2, "2": 0.1, "3": -0.4, "4": 0.0}}"#);
    let o = ccn(&["simulate", "--net", "fixture:fig1", "--field", &bad_field, "--x0", &x0, "--t1", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[dsl-error]"), "{}", o.err);

    let o = ccn(&["simulate", "--net", "fixture:fig1", "--field", &field, "--x0", &x0, "--t1", "1", "--method", "rk4", "--out", out.to_str().unwrap()]);
    assert_eq!(o.code, 2);
}

fn experiment(cfg: &str, out: &Path, extra: &[&str]) -> (Output, ExperimentResults) {
    let mut args = vec!["--format", "json"];
    args.extend_from_slice(extra);
    let cfg = config(cfg);
    args.extend_from_slice(&["experiment", "--config", &cfg, "--out", out.to_str().unwrap(), "--emit-plot-data"]);
    let o = ccn(&args);
    let text = fs::read_to_string(out.join("results.json")).unwrap();
    let results: ExperimentResults = serde_json::from_str(&text).unwrap();
    assert_eq!(serde_json::from_str::<ExperimentResults>(&o.out).unwrap(), results);
    (o, results)
}

#[test]
fn decay_experiment_is_independent_of_jobs() {
    let dir = tempfile::tempdir().unwrap();
    let (o, serial) = experiment("decay-fig1.json", &dir.path().join("a"), &["--jobs", "1"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert!(serial.passed());
    let (_, parallel) = experiment("decay-fig1.json", &dir.path().join("b"), &["--jobs", "4"]);
    assert_eq!(serial, parallel);
    for file in ["results.json", "summary.csv", "plot.dat"] {
        assert_eq!(fs::read(dir.path().join("a").join(file)).unwrap(), fs::read(dir.path().join("b").join(file)).unwrap());
    }
    assert_eq!(fs::read_to_string(dir.path().join("a/summary.csv")).unwrap().lines().count(), 101);

    let (_, reseeded) = experiment("decay-fig1.json", &dir.path().join("c"), &["--seed", "7"]);
    assert_eq!(reseeded.verdict.as_ref().unwrap().seed_base, 7);
    assert_ne!(reseeded, serial);
    let (_, again) = experiment("decay-fig1.json", &dir.path().join("d"), &["--seed", "7", "--jobs", "3"]);
    assert_eq!(again, reseeded);
}

#[test]
fn balanced_control_passes_and_parameters_override() {
    let dir = tempfile::tempdir().unwrap();
    let (o, results) = experiment("control-fig1.json", &dir.path().join("a"), &["-P", "k=0.5"]);
    assert_eq!(o.code, 0, "{}", o.err);
    assert_eq!(results.params["k"], 0.5);
    assert_eq!(results.verdict.as_ref().unwrap().observed, 0.0);

    let o = ccn(&["-P", "q=1", "experiment", "--config", &config("control-fig1.json"), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.code, 1);
}

#[test]
fn every_shipped_config_passes() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["equilibrium-fig1.json", "rigidity-fig1.json", "stationarity-chain.json"] {
        let (o, results) = experiment(name, &dir.path().join(name), &["--jobs", "2"]);
        assert_eq!(o.code, 0, "{name}: {}", o.err);
        assert!(results.passed(), "{name}");
    }
}

#[test]
fn failed_claims_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("decay-fig1.json")).unwrap().replace("\"threshold\": 0.95", "\"threshold\": 1.0");
    let cfg = write(dir.path(), "strict.json", &text);
    let o = ccn(&["experiment", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.code, 1, "{}", o.err);
    assert!(o.out.contains("FAIL"));

    let text = fs::read_to_string(config("decay-fig1.json")).unwrap().replace("\"seeds\": 100", "\"seeds\": 5");
    let cfg = write(dir.path(), "few.json", &text);
    let o = ccn(&["experiment", "--config", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.code, 1);
    assert!(o.err.starts_with("error[bad-config]"), "{}", o.err);
}

#[test]
fn man_pages_cover_every_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = ccn(&["man", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.code, 0);
    for page in ["ccn", "ccn-validate", "ccn-colorings", "ccn-analyze", "ccn-experiment", "ccn-simulate"] {
        let text = fs::read_to_string(dir.path().join(format!("{page}.1"))).unwrap();
        assert!(text.contains(".TH"), "{page}");
    }
    let o = ccn(&["man"]);
    assert!(o.out.contains("ccn"));
}
