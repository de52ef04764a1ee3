use std::process::{Command, Output};

use serde_json::Value;

fn ancilla(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ancilla"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn temp() -> tempfile::TempDir {
    tempfile::tempdir().unwrap()
}

#[test]
fn elgi_grid_has_minimum_near_quarter_pi() {
    let text = stdout(&ancilla(&["elgi", "--theta-grid", "0:pi:64"]));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], ["theta", "D3_circuit", "D3_closed_form"]);
    assert_eq!(rows.len(), 65);
    let (theta, d3) = rows[1..]
        .iter()
        .map(|r| (r[0].parse::<f64>().unwrap(), r[1].parse::<f64>().unwrap()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((theta - std::f64::consts::FRAC_PI_4).abs() < 0.03);
    assert!((d3 + 0.134).abs() < 0.002);
}

#[test]
fn counts_reproduce_scan_table() {
    let text = stdout(&ancilla(&["counts", "--n-max", "5"]));
    for line in ["1,8,2,1,1,1,1", "3,192,11,3,1,3,3", "5,7168,103,5,1,5,6"] {
        assert!(text.lines().any(|l| l == line), "missing {line}");
    }
}

#[test]
fn sspt_identity_is_exact() {
    let doc: Value =
        serde_json::from_str(&stdout(&ancilla(&["sspt", "--process", "identity", "--noise", "0"]))).unwrap();
    let chi = &doc["result"]["chi"];
    assert!((chi[0][0][0].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((doc["result"]["fidelity_vs_theory"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert_eq!(doc["config"]["subcommand"], "sspt");
    assert_eq!(doc["config"]["params"]["noise"], 0.0);
}

#[test]
fn out_dir_holds_csv_json_and_recipe() {
    let tmp = temp();
    let dir = tmp.path().join("run");
    stdout(&ancilla(&["fcf", "--b-grid", "0:1:3", "--seed", "4", "--out", dir.to_str().unwrap()]));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("result.json")).unwrap()).unwrap();
    assert_eq!(doc["config"]["seed"], 4);
    assert_eq!(doc["files"], serde_json::json!(["fcf.csv", "plot.txt"]));
    let csv = std::fs::read_to_string(dir.join("fcf.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 3 * 4 * 2);
}

#[test]
fn config_file_sits_under_flags() {
    let tmp = temp();
    let dir = tmp.path().join("run");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c.json");
    std::fs::write(&path, r#"{"subcommand": "elgi", "seed": 9, "params": {"n": 4, "theta_grid": "0:pi:5"}}"#).unwrap();
    let text = stdout(&ancilla(&["--config", path.to_str().unwrap(), "elgi", "--theta-grid", "0:pi:3"]));
    assert!(text.contains(r#""seed":9"#));
    let rows = csv_rows(&text);
    assert_eq!(rows[0][1], "D4_circuit");
    assert_eq!(rows.len(), 4);
    let text = stdout(&ancilla(&["--config", path.to_str().unwrap(), "--seed", "1", "elgi"]));
    assert!(text.contains(r#""seed":1"#));
}

#[test]
fn config_errors_exit_two_with_record() {
    let tmp = temp();
    let dir = tmp.path().join("run");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("c.json");
    std::fs::write(&path, r#"{"params": {"bogus": 1}}"#).unwrap();
    for args in [
        vec!["--config", path.to_str().unwrap(), "elgi"],
        vec!["elgi", "--theta-grid", "0:pi"],
        vec!["sspt", "--process", "swirl"],
        vec!["noise", "--seq", "xy4"],
        vec!["elgi", "--unknown"],
    ] {
        let out = ancilla(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = String::from_utf8(out.stderr).unwrap();
        let record: Value = serde_json::from_str(err.lines().last().unwrap()).unwrap();
        assert_eq!(record["error"]["kind"], "config");
    }
    std::fs::write(&path, r#"{"subcommand": "fcf"}"#).unwrap();
    assert_eq!(ancilla(&["--config", path.to_str().unwrap(), "elgi"]).status.code(), Some(2));
}

#[test]
fn error_record_written_to_out_dir() {
    let tmp = temp();
    let dir = tmp.path().join("run");
    let out = ancilla(&["moussa", "--op", "projector", "--operator", "X", "--out", dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let record: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("error.json")).unwrap()).unwrap();
    assert_eq!(record["error"]["exit_code"], 2);
}

#[test]
fn help_lists_units() {
    let text = stdout(&ancilla(&["noise", "--help"]));
    for needle in ["kicks per ms", "degrees", "ms", "Hz", "(count)"] {
        assert!(text.contains(needle), "missing {needle}");
    }
    for sub in ["elgi", "inrm", "moussa", "fcf", "contextuality", "aaqst", "sspt", "counts", "noise-spectrum"] {
        let text = stdout(&ancilla(&[sub, "--help"]));
        assert!(text.contains("--seed") && text.contains("--out"), "{sub}");
    }
}

#[test]
fn moussa_matches_trace() {
    let doc: Value = serde_json::from_str(&stdout(&ancilla(&[
        "moussa", "--op", "joint", "--n", "2", "--state", "ghz", "--operator", "XX", "--second", "ZZ",
    ])))
    .unwrap();
    assert!(doc["result"]["abs_error"].as_f64().unwrap() < 1e-12);
    let doc: Value = serde_json::from_str(&stdout(&ancilla(&[
        "moussa", "--op", "hermitian", "--state", "plus", "--operator", "X",
    ])))
    .unwrap();
    assert!((doc["result"]["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}
