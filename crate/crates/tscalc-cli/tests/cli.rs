//! End-to-end checks of the installed binary: exit codes, stdout shapes,
//! and the documented example invocations.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tscalc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn tscalc")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn write_temp(name: &str, content: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("tscalc-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, content).expect("write temp config");
    path
}

const Q_CONFIG: &str = r#"{
    "n": 2,
    "scale": {"type": "geometric", "q": 2, "t0": 1},
    "B": "1/t^2",
    "beta": "t/2",
    "A": "0",
    "alpha": "t"
}"#;

#[test]
fn poly_integer_grid_prints_exact_value() {
    let out = run(&[
        "poly", "--scale", "uniform:h=1,t0=0", "--k", "2", "--s", "2", "--t", "5",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "3");
}

#[test]
fn poly_geometric_closed_form() {
    // h_2(4, 1) on {2^k} = (4 - 1)(4 - 2)/(1 + 2) = 2
    let out = run(&[
        "poly", "--scale", "geometric:q=2,t0=1", "--k", "2", "--s", "1", "--t", "4",
    ]);
    assert!(out.status.success());
    assert_eq!(stdout_of(&out).trim(), "2");
}

#[test]
fn poly_rejects_bad_scale_syntax() {
    let out = run(&["poly", "--scale", "fractal:d=2", "--k", "1", "--s", "0", "--t", "1"]);
    assert!(!out.status.success());
}

#[test]
fn lemmas_reports_all_four_inequalities() {
    let out = run(&["lemmas", "--random-scales", "2", "--seed", "7"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    for name in [
        "argument-swap",
        "product-dominates",
        "convolution-bound",
        "shift-dominates",
    ] {
        assert!(text.contains(name), "missing {name} in output:\n{text}");
    }
    assert!(text.contains("all inequalities hold"));
}

#[test]
fn classify_concave_growth_is_degree_one() {
    let out = run(&[
        "classify", "--scale", "uniform:h=1,t0=0", "--f", "t^0.5", "--n", "2",
        "--lo", "1", "--hi", "400",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("json profile");
    assert_eq!(v["m"], 1);
    assert_eq!(v["n"], 2);
}

#[test]
fn philos_emits_profile_and_bound() {
    let out = run(&[
        "philos", "--scale", "uniform:h=1,t0=0", "--f", "t^0.5", "--n", "2",
        "--lo", "1", "--hi", "200", "--lambda", "0.5",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("json");
    assert_eq!(v["profile"]["m"], 1);
    assert!(v["philos"]["worst_normalized"].as_f64().unwrap() >= -1e-10);
    assert!(v["lambda_bound"]["start_index"].is_number());
}

#[test]
fn criterion_without_config_fails_with_usage() {
    let out = run(&["criterion"]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("Usage"), "stderr should show usage:\n{err}");
    assert!(err.contains("--config"));
}

#[test]
fn criterion_runs_config_and_prints_digest() {
    let path = write_temp("qconf.json", Q_CONFIG);
    let out = run(&["criterion", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("json");
    assert_eq!(v["liminf"]["criterion"], "liminf-window");
    assert_eq!(v["liminf"]["verdict"], "satisfied");
    assert_eq!(v["conclusion"]["conclusion"], "all-solutions-oscillate");
}

#[test]
fn criterion_writes_csv_traces() {
    let path = write_temp("qconf2.json", Q_CONFIG);
    let dir = std::env::temp_dir().join(format!("tscalc-cli-out-{}", std::process::id()));
    let out = run(&[
        "criterion", "--config", path.to_str().unwrap(),
        "--out-dir", dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let liminf = std::fs::read_to_string(dir.join("liminf.csv")).expect("liminf.csv");
    assert!(liminf.starts_with("t,value,window_lo,window_hi"));
    let limsup = std::fs::read_to_string(dir.join("limsup.csv")).expect("limsup.csv");
    assert!(limsup.lines().count() > 10);
}

#[test]
fn criterion_rejects_malformed_json() {
    let path = write_temp("broken.json", "{\"n\": 2,");
    let out = run(&["criterion", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line"), "parse error should carry a position:\n{err}");
}

#[test]
fn criterion_rejects_negative_forcing_term() {
    let path = write_temp(
        "negb.json",
        r#"{"n": 2, "scale": {"type": "uniform", "h": 1, "t0": 1}, "B": "-1", "beta": "t - 1"}"#,
    );
    let out = run(&["criterion", "--config", path.to_str().unwrap()]);
    assert!(!out.status.success());
}

#[test]
fn simulate_streams_csv_to_stdout() {
    let path = write_temp("qconf3.json", Q_CONFIG);
    let out = run(&[
        "simulate", "--config", path.to_str().unwrap(), "--horizon", "10",
    ]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("index,t,x,z"));
    assert_eq!(text.lines().count(), 12); // header + 11 rows
    let row3: Vec<&str> = text.lines().nth(4).unwrap().split(',').collect();
    assert_eq!(row3[0], "3");
    assert_eq!(row3[2], "-7.0");
}

#[test]
fn simulate_with_out_writes_file_and_summary() {
    let path = write_temp("qconf4.json", Q_CONFIG);
    let csv = std::env::temp_dir().join(format!("tscalc-cli-trace-{}.csv", std::process::id()));
    let out = run(&[
        "simulate", "--config", path.to_str().unwrap(), "--horizon", "50",
        "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("summary json");
    assert_eq!(v["points"], 51);
    assert!(v["sign_changes"].as_u64().unwrap() >= 4);
    let body = std::fs::read_to_string(&csv).expect("trace file");
    assert!(body.starts_with("index,t,x,z"));
}

#[test]
fn reproduce_q_difference_concludes_oscillation() {
    let out = run(&[
        "reproduce", "--example", "q-difference", "--q", "2", "--n", "2",
        "--b0", "1", "--beta0", "1",
    ]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout_of(&out)).expect("json");
    assert_eq!(v["conclusion"]["conclusion"], "all-solutions-oscillate");
    assert_eq!(v["threshold"]["satisfied"], true);
    assert!(v["simulation"]["sign_changes"].as_u64().unwrap() >= 20);
    // traces are digested away
    assert!(v["liminf"]["trace"].is_null());
    assert!(v["liminf"]["points"].is_number());
}

#[test]
fn reproduce_unknown_example_fails() {
    let out = run(&["reproduce", "--example", "pde"]);
    assert!(!out.status.success());
}
