use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sparseq::io::read_vector;
use sparseq::{full_objective, lambda_from_scaling, parse_libsvm, LossKind, LossModel, Problem};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

fn sparseq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparseq"))
        .args(args)
        .env_remove("SPARSEQ_THREADS")
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// Value column of the row starting with `label`.
fn field(text: &str, label: &str) -> Vec<String> {
    text.lines()
        .find(|l| l.split_whitespace().next() == Some(label))
        .unwrap_or_else(|| panic!("no {label} row in\n{text}"))
        .split_whitespace()
        .skip(1)
        .map(str::to_owned)
        .collect()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_on_fixture_converges() {
    let data = fixture("tiny_ls.libsvm");
    let dir = tempfile::tempdir().unwrap();
    let x_out = dir.path().join("x.json");
    let out = sparseq(&[
        "solve",
        "--data",
        path_str(&data),
        "--lambda-c",
        "0.01",
        "--n-features",
        "50",
        "--x-out",
        path_str(&x_out),
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    let residual: f64 = field(&text, "Residual")[0].parse().unwrap();
    assert!(residual <= 1e-3);
    assert!(field(&text, "Iter#")[0].contains('('));

    let dataset = parse_libsvm(&data, Some(50)).unwrap();
    let lam = lambda_from_scaling(&dataset, LossKind::LeastSquares, 0.01).unwrap();
    let printed_lam: f64 = field(&text, "Lambda")[0].parse().unwrap();
    assert!((printed_lam - lam).abs() <= 1e-6 * lam);
    let problem = Problem::new(
        dataset.a.clone(),
        LossModel::least_squares(dataset.b.clone()).unwrap(),
        lam,
        0.5,
    )
    .unwrap();
    let x = read_vector(&x_out).unwrap();
    let f = full_objective(&x, &problem).unwrap();
    let printed: f64 = field(&text, "Fval")[0].parse().unwrap();
    assert!((printed - f).abs() <= 1e-10 * f.abs().max(1.0));
    let nnz: usize = field(&text, "Nnz")[0].parse().unwrap();
    assert_eq!(nnz, x.iter().filter(|v| **v != 0.0).count());
}

#[test]
fn invalid_q_is_a_usage_error() {
    let data = fixture("tiny_ls.libsvm");
    let out = sparseq(&[
        "solve",
        "--data",
        path_str(&data),
        "--lambda-c",
        "0.01",
        "--q",
        "1.5",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn missing_file_fails() {
    let out = sparseq(&[
        "solve",
        "--data",
        "/nonexistent.libsvm",
        "--lambda-c",
        "0.01",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn help_exits_zero() {
    assert_eq!(sparseq(&["--help"]).status.code(), Some(0));
}

#[test]
fn iteration_cap_exits_two() {
    let data = fixture("tiny_logistic.libsvm");
    let out = sparseq(&[
        "solve",
        "--data",
        path_str(&data),
        "--loss",
        "logistic",
        "--lambda-c",
        "0.01",
        "--max-iters",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn compare_shares_lambda_and_converges() {
    let data = fixture("tiny_logistic.libsvm");
    let out = sparseq(&[
        "compare",
        "--data",
        path_str(&data),
        "--loss",
        "logistic",
        "--lambda-c",
        "0.01",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lam = field(&text, "Lambda");
    assert_eq!(lam.len(), 2);
    assert_eq!(lam[0], lam[1]);
    for r in field(&text, "Residual") {
        assert!(r.parse::<f64>().unwrap() <= 1e-3);
    }
    let threaded = Command::new(env!("CARGO_BIN_EXE_sparseq"))
        .args([
            "compare",
            "--data",
            path_str(&data),
            "--loss",
            "logistic",
            "--lambda-c",
            "0.01",
            "--no-timing",
        ])
        .env("SPARSEQ_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(stdout(&threaded), text);
}

#[test]
fn traces_are_reproducible_without_timing() {
    let data = fixture("tiny_ls.libsvm");
    let dir = tempfile::tempdir().unwrap();
    let mut traces = Vec::new();
    for (i, ext) in ["json", "json", "csv", "csv"].iter().enumerate() {
        let path = dir.path().join(format!("t{i}.{ext}"));
        let out = sparseq(&[
            "solve",
            "--data",
            path_str(&data),
            "--lambda-c",
            "0.01",
            "--no-timing",
            "--trace-out",
            path_str(&path),
        ]);
        assert_eq!(out.status.code(), Some(0));
        traces.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    assert_eq!(traces[2], traces[3]);
    let doc: serde_json::Value = serde_json::from_slice(&traces[0]).unwrap();
    assert!(doc["trace"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["step"] == "newton"));
}

#[test]
fn baseline_trace_has_no_newton_records() {
    let data = fixture("tiny_ls.libsvm");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let out = sparseq(&[
        "solve",
        "--data",
        path_str(&data),
        "--lambda-c",
        "0.01",
        "--solver",
        "pgls",
        "--trace-out",
        path_str(&path),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_eq!(doc["summary"]["newton_iterations"], 0);
    assert!(doc["trace"]
        .as_array()
        .unwrap()
        .iter()
        .all(|r| r["step"] == "pg"));
    assert!(field(&stdout(&out), "Iter#")[0].ends_with("(0)"));
}

#[test]
fn config_file_fills_in_and_flags_win() {
    let data = fixture("tiny_logistic.libsvm");
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        "loss = logistic\nlambda-c = 0.01\nmax-iters = 1\nno-timing = true\n",
    )
    .unwrap();
    let base = [
        "solve",
        "--data",
        path_str(&data),
        "--config",
        path_str(&cfg),
    ];
    assert_eq!(sparseq(&base).status.code(), Some(2));
    let mut overridden = base.to_vec();
    overridden.extend(["--max-iters", "50000"]);
    assert_eq!(sparseq(&overridden).status.code(), Some(0));

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(sparseq(&base).status.code(), Some(1));
}

#[test]
fn check_reports_saved_iterate() {
    let data = fixture("tiny_ls.libsvm");
    let dir = tempfile::tempdir().unwrap();
    let x_out = dir.path().join("x.json");
    let common = ["--data", path_str(&data), "--lambda-c", "0.01"];
    let mut solve = vec!["solve", "--x-out", path_str(&x_out)];
    solve.extend(common);
    assert_eq!(sparseq(&solve).status.code(), Some(0));
    let mut check = vec!["check", "--x", path_str(&x_out), "--gamma", "1,10,100"];
    check.extend(common);
    let out = sparseq(&check);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let grid_rows = text
        .lines()
        .filter(|l| l.split_whitespace().all(|w| w.parse::<f64>().is_ok()))
        .count();
    assert_eq!(grid_rows, 3);
    let min: f64 = field(&text, "min")[1].parse().unwrap();
    assert!(min <= 1e-3);
}
