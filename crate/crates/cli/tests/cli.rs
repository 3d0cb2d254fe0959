//! End-to-end runs of the `twocenter` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

use twocenter::run::parse_output;

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twocenter")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    dir.join(name)
}

#[test]
fn asymptotic_zero_charge_rows_are_exact() {
    let out = bin(&[
        "run",
        "--mode",
        "asymptotic",
        "--Z",
        "0",
        "--omega",
        "1",
        "--r-min",
        "1",
        "--r-max",
        "5",
        "--r-steps",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let parsed = parse_output(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(parsed.rows.len(), 5);
    for row in &parsed.rows {
        assert_eq!(row.e_asym.unwrap(), 3.0 + 0.5 * row.r * row.r);
    }
}

#[test]
fn both_mode_zero_charge_residuals() {
    let out = bin(&[
        "run",
        "--mode",
        "both",
        "--Z",
        "0",
        "--omega",
        "1",
        "--r-min",
        "1",
        "--r-max",
        "10",
        "--r-steps",
        "4",
        "--q",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed = parse_output(&String::from_utf8(out.stdout).unwrap()).unwrap();
    for row in &parsed.rows {
        assert!(row.resid_e.unwrap() <= 1e-8, "{row:?}");
        assert_eq!((row.nodes_radial, row.nodes_angular), (Some(0), Some(1)));
    }
}

#[test]
fn output_is_reproducible_in_both_formats() {
    for format in ["csv", "json"] {
        let args = ["run", "--mode", "both", "--r-min", "10", "--r-max", "30", "--r-steps", "3", "--format", format];
        let a = bin(&args);
        let b = bin(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "{format}");
    }
    let serial = bin(&["run", "--mode", "numeric", "--r-min", "10", "--r-max", "30", "--r-steps", "3"]);
    let parallel =
        bin(&["run", "--mode", "numeric", "--r-min", "10", "--r-max", "30", "--r-steps", "3", "--no-continuation"]);
    let (s, p) = (
        parse_output(&String::from_utf8(serial.stdout).unwrap()).unwrap(),
        parse_output(&String::from_utf8(parallel.stdout).unwrap()).unwrap(),
    );
    for (x, y) in s.rows.iter().zip(&p.rows) {
        assert!((x.e_numeric.unwrap() - y.e_numeric.unwrap()).abs() < 1e-9);
    }
}

#[test]
fn report_reads_run_output() {
    let csv = scratch("report_input.csv");
    let out = bin(&[
        "run",
        "--mode",
        "both",
        "--r-min",
        "10",
        "--r-max",
        "40",
        "--r-steps",
        "4",
        "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = bin(&["report", csv.to_str().unwrap()]);
    assert_eq!(text.status.code(), Some(0));
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("lambda residual order"));
    assert!(text.contains("E1 literal"));
    assert!(text.contains("lambda sign diagnostic"));
    let json = bin(&["report", "--format", "json", csv.to_str().unwrap()]);
    let value: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(value["runs"].as_array().unwrap().len(), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["run", "--r-min", "0"]).status.code(), Some(1));
    assert_eq!(bin(&["run", "--r-min", "5", "--r-max", "2"]).status.code(), Some(1));
    assert_eq!(bin(&["run", "--order", "3"]).status.code(), Some(1));
    assert_eq!(bin(&["run", "--unknown"]).status.code(), Some(1));
    assert_eq!(bin(&["run", "--fixtures", "x.txt"]).status.code(), Some(1));
    assert_eq!(bin(&["report", "/nonexistent/file.csv"]).status.code(), Some(1));
    let short = scratch("short.csv");
    bin(&["run", "--r-min", "10", "--r-max", "20", "--r-steps", "2", "--out", short.to_str().unwrap()]);
    assert_eq!(bin(&["report", short.to_str().unwrap()]).status.code(), Some(1));
    // A matching tolerance below double-precision resolution cannot be met;
    // the rows are still written, marked as failed.
    let out = bin(&["run", "--mode", "numeric", "--r-min", "5", "--r-max", "6", "--r-steps", "2", "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(2));
    let parsed = parse_output(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(parsed.rows.len(), 2);
    assert!(parsed.rows.iter().all(|r| r.status.starts_with("failed")));
}

#[test]
fn oracle_mode_writes_fixtures() {
    let path = scratch("oracle_fixtures.txt");
    let out = bin(&[
        "run",
        "--mode",
        "oracle",
        "--r-min",
        "5",
        "--r-max",
        "5",
        "--r-steps",
        "1",
        "--grid-points",
        "48",
        "--fixtures",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fx = twocenter::fixtures::read(&path).unwrap();
    assert_eq!(fx.len(), 2);
    let parsed = parse_output(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let row = &parsed.rows[0];
    assert_eq!(row.e_grid, Some(fx[0].energy));
    assert!((row.e_grid.unwrap() - row.e_numeric.unwrap()).abs() < 5e-3);
}
