use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use eiskit::eisenstein::FEReport;
use eiskit::forms::mock_maass_form;
use eiskit::uniqueness::{AffineMap, FalsificationReport, UniquenessVerdict};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::Value;

fn eiskit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eiskit")).args(args).env_remove("EISKIT_THREADS").output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[derive(Deserialize)]
struct Envelope<T> {
    schema: u32,
    command: String,
    passed: bool,
    result: T,
}

fn read_report<T: DeserializeOwned>(path: &Path) -> Envelope<T> {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_usage_error(out: &Output) {
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(out));
    let err = stderr(out);
    assert_eq!(err.trim_end().lines().count(), 1, "diagnostic should be one line: {err:?}");
}

#[test]
fn rho_borel_gl3() {
    let out = eiskit(&["rho", "--partition", "1,1,1"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "[1, 0, -1]\n");
}

#[test]
fn rho_two_two() {
    assert_eq!(stdout(&eiskit(&["rho", "--partition", "2,2"])), "[1, -1]\n");
    assert_eq!(stdout(&eiskit(&["rho", "--partition", "1,2"])), "[1, -1/2]\n");
}

#[test]
fn divisor_sum_at_one() {
    let out = eiskit(&["divisor-sum", "--partition", "1,1,1", "--m", "1", "--s", "0.5,0.25"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "1\n");
}

#[test]
fn divisor_sum_gl2_values() {
    // σ-type sum at s = (0, 0): number of divisors
    let out = eiskit(&["divisor-sum", "--partition", "1,1", "--m", "12,7", "--s", "0"]);
    assert_eq!(stdout(&out), "12: 6\n7: 2\n");
}

#[test]
fn symbolic_fe_two_two() {
    let out = eiskit(&["check-fe", "--partition", "2,2", "--forms", "mock:1,mock:2", "--sigma", "2,1", "--mode", "symbolic"]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).ends_with("pass\n"));
}

#[test]
fn numeric_fe_gl2_report_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fe.json");
    let out = eiskit(&[
        "check-fe", "--partition", "1,1", "--s", "0.2+3i", "--sigma", "2,1", "--mode", "numeric", "--y", "0.7",
        "--m", "1,2,5", "--output", path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: Envelope<FEReport> = read_report(&path);
    assert_eq!(report.schema, 1);
    assert_eq!(report.command, "check-fe");
    assert!(report.passed);
    assert_eq!(report.result.checks.len(), 3);
    assert_eq!(report.result.sigma, vec![2, 1]);
}

#[test]
fn form_file_matches_mock_token() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.json");
    fs::write(&path, mock_maass_form(2, 5).unwrap().to_json()).unwrap();
    let from_file = eiskit(&["params", "--partition", "2,1", "--forms", &format!("{},1", path.display()), "--s", "0.1"]);
    let from_token = eiskit(&["params", "--partition", "2,1", "--forms", "mock:5,1", "--s", "0.1"]);
    assert!(from_file.status.success(), "{}", stderr(&from_file));
    assert_eq!(stdout(&from_file), stdout(&from_token));
}

#[test]
fn falsify_is_deterministic_across_threads() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let run = |path: &Path, threads: &str| {
        let out = eiskit(&["falsify", "--partition", "1,1,1", "--seed", "7", "--threads", threads, "--output", path.to_str().unwrap()]);
        assert!(out.status.success(), "{}", stderr(&out));
    };
    run(&a, "1");
    run(&b, "3");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let report: Envelope<FalsificationReport> = read_report(&a);
    assert_eq!(report.result.trials.len(), 100);
    assert_eq!(report.result.rejected, 100);
    assert_eq!(report.result.with_numeric_witness, 100);
}

#[test]
fn csv_output() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("lambda.csv");
    let out = eiskit(&["divisor-sum", "--partition", "1,1", "--m", "1,2", "--s", "0.5", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("m,lambda_re,lambda_im"));
    assert_eq!(lines.next(), Some("1,1,0"));
    // 2^{1/2} + 2^{-1/2}
    let second: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((second[1] - 1.5 * 2f64.sqrt()).abs() < 1e-15);
}

#[test]
fn json_to_stdout_has_schema() {
    let out = eiskit(&["rho", "--partition", "2,1", "--format", "json"]);
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["schema"], 1);
    assert_eq!(value["result"]["rho"], serde_json::json!(["1/2", "-1"]));
    assert_eq!(value["result"]["rho_borel"], serde_json::json!(["1", "0", "-1"]));
}

#[test]
fn uniqueness_map_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("mu.json");
    // swap of the two blocks plus a kernel element; the weights of 2,2 are (2, 2)
    fs::write(&path, r#"{"A": [["1/2", "3/2"], [1, 0]], "b": [0, 0]}"#).unwrap();
    let report_path = dir.path().join("verdict.json");
    let out = eiskit(&[
        "uniqueness", "--partition", "2,2", "--forms", "mock:1,mock:1", "--map", path.to_str().unwrap(), "--output",
        report_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).starts_with("permutation [2, 1]"));
    #[derive(Deserialize)]
    struct Body {
        map: Option<AffineMap>,
        verdict: Option<UniquenessVerdict>,
        consistent: bool,
    }
    let report: Envelope<Body> = read_report(&report_path);
    assert!(report.result.consistent);
    assert!(report.result.verdict.unwrap().is_permutation());
    assert_eq!(report.result.map.unwrap().dim(), 2);

    // distinct forms: the swap crosses groups
    let out = eiskit(&["uniqueness", "--partition", "2,2", "--forms", "mock:1,mock:2", "--map", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).starts_with("rejected"));
}

#[test]
fn failing_check_exits_one_and_still_writes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("extract.json");
    let out = eiskit(&[
        "extract", "--partition", "1,1", "--s", "1.5", "--m", "1", "--radius", "20", "--nodes", "8", "--tol", "1e-15",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let value: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(value["passed"], false);
}

#[test]
fn usage_errors_exit_two() {
    assert_usage_error(&eiskit(&["rho", "--partition", "1,1,1", "--bogus"]));
    assert_usage_error(&eiskit(&["rho", "--partition", "0,2"]));
    assert_usage_error(&eiskit(&["params", "--partition", "2,2", "--forms", "mock:1", "--s", "0"]));
    assert_usage_error(&eiskit(&["params", "--partition", "1,1", "--forms", "1,1", "--s", "0.1,0.2,0.3"]));
    assert_usage_error(&eiskit(&["params", "--partition", "2,1", "--forms", "/no/such/form.json,1", "--s", "0"]));
    assert_usage_error(&eiskit(&["check-fe", "--partition", "1,1,1", "--sigma", "2,1"]));
    assert_usage_error(&eiskit(&["falsify", "--partition", "1,1", "--threads", "0"]));
    assert_usage_error(&eiskit(&["eval", "--partition", "1,1", "--s", "1.5", "--truncation", "cubic:3"]));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ not json").unwrap();
    assert_usage_error(&eiskit(&["params", "--partition", "2,1", "--forms", &format!("{},1", bad.display()), "--s", "0"]));
    assert_usage_error(&eiskit(&["uniqueness", "--partition", "1,1", "--map", bad.to_str().unwrap()]));
}

#[test]
fn help_exits_zero() {
    let out = eiskit(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("selftest"));
}

#[test]
fn selftest_passes() {
    let out = eiskit(&["selftest"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS")));
}
