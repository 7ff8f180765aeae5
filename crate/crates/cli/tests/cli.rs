//! End-to-end checks of the `oem` binary: subcommands, report contents, and
//! exit codes.

use std::io::Write;
use std::path::Path;
use std::process::{Command, Output};

fn oem() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oem"))
}

fn write_design(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("design.csv");
    let mut f = std::fs::File::create(&path).unwrap();
    write!(
        f,
        "A,B,C,AB,AC,BC,y\n\
         -1,-1,-1,1,1,1,2\n\
         -1,1,1,-1,-1,1,1\n\
         1,-1,1,-1,1,-1,-4\n\
         1,1,-1,1,-1,-1,1.5\n"
    )
    .unwrap();
    path
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn beta_value(text: &str, name: &str) -> f64 {
    for line in text.lines() {
        let line = line.trim_start();
        if let Some(rest) = line.strip_prefix(&format!("{name} ")) {
            return rest.trim().parse().unwrap();
        }
    }
    panic!("coefficient {name} not found in report:\n{text}");
}

#[test]
fn fit_reproduces_coherent_lasso_solution() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_design(dir.path());
    let out = oem()
        .args([
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--penalty",
            "lasso",
            "--lambda",
            "1",
            "--no-standardize",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.contains("gamma1: 8"));
    assert!(text.contains("d: 8"));
    assert!(text.contains("t: 3"));
    assert!(text.contains("converged: true"));
    let want = [
        ("A", -0.5625),
        ("B", 0.4375),
        ("C", -0.6875),
        ("AB", 0.6875),
        ("AC", -0.4375),
        ("BC", 0.5625),
    ];
    for (name, v) in want {
        assert!((beta_value(&text, name) - v).abs() < 1e-6, "{name}");
    }
}

#[test]
fn fit_without_penalty_matches_minimal_norm_solution() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_design(dir.path());
    let out = oem()
        .args([
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--no-standardize",
            "--tol",
            "1e-9",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    for (name, v) in [("A", -0.6875), ("BC", 0.6875), ("C", -0.8125)] {
        assert!((beta_value(&text, name) - v).abs() < 1e-6, "{name}");
    }
}

#[test]
fn path_emits_one_block_per_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_design(dir.path());
    let out = oem()
        .args([
            "path",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--penalty",
            "lasso",
            "--lambdas",
            "4,1,0.25",
            "--no-standardize",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.matches("converged:").count(), 3);
    for line in ["\nlambda: 4\n", "\nlambda: 1\n", "\nlambda: 0.25\n"] {
        assert!(text.contains(line), "missing block {line:?}");
    }
}

#[test]
fn orthogonalize_reports_expansion_and_delta() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_design(dir.path());
    let out = oem()
        .args([
            "orthogonalize",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--show-delta",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("gamma1: 8"));
    assert!(text.contains("t: 3"));
    assert!(text.contains("rows_added: 3"));
    assert!(text.contains("delta:"));
}

#[test]
fn coherence_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_design(dir.path());
    let out = oem()
        .args([
            "coherence",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--penalty",
            "lasso",
            "--lambda",
            "1",
            "--no-standardize",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("coherent: true"));

    // The coordinate-descent style solution breaks the signed equalities.
    let out = oem()
        .args([
            "coherence",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--beta=-1.125,0.875,-1.375,0,0,0",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("coherent: false"));
    assert!(text.contains("violations: 3"));
}

#[test]
fn bench_iterations_emits_long_format() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("table.csv");
    let out = oem()
        .args([
            "bench-iterations",
            "--p",
            "3",
            "--n-grid",
            "40,80",
            "--replications",
            "2",
            "--seed",
            "7",
            "--out",
            out_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.starts_with("experiment,n,metric,value\n"));
    assert_eq!(text.matches("iterations,40,").count(), 3);
    assert_eq!(text.matches("iterations,80,").count(), 3);
    assert!(text.contains("mean_iter_lasso"));
}

#[test]
fn bench_oracle_emits_long_format() {
    let out = oem()
        .args([
            "bench-oracle",
            "--penalty",
            "mcp",
            "--p",
            "4",
            "--n-grid",
            "60",
            "--replications",
            "3",
            "--seed",
            "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", stderr(&out));
    let text = stdout(&out);
    assert!(text.starts_with("experiment,n,metric,value\n"));
    assert!(text.contains("oracle,60,recovery_rate,"));
    assert!(text.contains("oracle,60,rmse_oracle,"));
}

#[test]
fn usage_errors_exit_with_one() {
    let out = oem().args(["fit", "--nonsense"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let data = write_design(dir.path());
    // Domain violation in a penalty parameter is a usage error.
    let out = oem()
        .args([
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--penalty",
            "scad",
            "--lambda",
            "1",
            "--a",
            "1.5",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("scad"));
}

#[test]
fn data_errors_exit_with_two() {
    let out = oem()
        .args(["fit", "--data", "/nonexistent/file.csv", "--response", "y"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,y\nNaN,1\n").unwrap();
    let out = oem()
        .args(["fit", "--data", bad.to_str().unwrap(), "--response", "y"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("non-finite"));

    let header_only = dir.path().join("empty.csv");
    std::fs::write(&header_only, "a,y\n").unwrap();
    let out = oem()
        .args([
            "fit",
            "--data",
            header_only.to_str().unwrap(),
            "--response",
            "y",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("no data rows"));
}

#[test]
fn strict_nonconvergence_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let skew = dir.path().join("skew.csv");
    std::fs::write(
        &skew,
        "a,b,c,y\n0,0,1.5,1\n-1.3333333333333333,-0.6666666666666666,0.16666666666666666,-2\n\
         0.6666666666666666,1.3333333333333333,0.16666666666666666,3\n\
         -0.6666666666666666,0.6666666666666666,-1.1666666666666667,0.5\n",
    )
    .unwrap();
    let out = oem()
        .args([
            "fit",
            "--data",
            skew.to_str().unwrap(),
            "--response",
            "y",
            "--max-iter",
            "2",
            "--tol",
            "1e-14",
            "--no-standardize",
            "--strict",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3), "stderr: {}", stderr(&out));
    assert!(stderr(&out).contains("did not converge"));

    // Without --strict the run reports and exits cleanly.
    let out = oem()
        .args([
            "fit",
            "--data",
            skew.to_str().unwrap(),
            "--response",
            "y",
            "--max-iter",
            "2",
            "--tol",
            "1e-14",
            "--no-standardize",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("converged: false"));
}

#[test]
fn report_can_be_written_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_design(dir.path());
    let report = dir.path().join("report.txt");
    let out = oem()
        .args([
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--penalty",
            "lasso",
            "--lambda",
            "1",
            "--no-standardize",
            "--out",
            report.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).is_empty());
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("oem: fit"));
    assert!(text.contains("penalty: lasso"));
}

#[test]
fn trace_flag_prints_objective_values() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_design(dir.path());
    let out = oem()
        .args([
            "fit",
            "--data",
            data.to_str().unwrap(),
            "--response",
            "y",
            "--penalty",
            "lasso",
            "--lambda",
            "1",
            "--no-standardize",
            "--trace",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("objective_trace:"));
    // The trace opens at ||y||^2 = 23.25 for the zero init.
    assert!(text.contains("\n  23.25\n"));
}

#[test]
fn help_exits_cleanly() {
    let out = oem().arg("--help").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for sub in [
        "fit",
        "path",
        "orthogonalize",
        "coherence",
        "bench-iterations",
        "bench-oracle",
    ] {
        assert!(text.contains(sub), "missing subcommand {sub} in help");
    }
}
