mod common;

use std::path::PathBuf;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

use sparseq::fixtures::{generate_dataset, SyntheticSpec};
use sparseq::io::{
    parse_libsvm_str, read_vector, trace_csv, trace_json, write_libsvm, write_vector, TraceSummary,
    CSV_HEADER,
};
use sparseq::{
    lambda_from_scaling, parse_libsvm, solve, write_trace, Dataset, Error, LossKind, LossModel,
    Problem, SolverConfig, TraceFormat,
};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

/// Dense rows read with plain string splitting, independent of the library parser.
fn naive_rows(text: &str) -> Vec<(f64, Vec<(usize, f64)>)> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let mut parts = l.split_whitespace();
            let label: f64 = parts.next().unwrap().parse().unwrap();
            let feats = parts
                .map(|p| {
                    let (i, v) = p.split_once(':').unwrap();
                    (i.parse::<usize>().unwrap() - 1, v.parse::<f64>().unwrap())
                })
                .collect();
            (label, feats)
        })
        .collect()
}

fn problem_from(dataset: &Dataset, kind: LossKind) -> Problem {
    let lam = lambda_from_scaling(dataset, kind, 1e-2).unwrap();
    let loss = LossModel::new(kind, dataset.b.clone()).unwrap();
    Problem::new(dataset.a.clone(), loss, lam, 0.5).unwrap()
}

#[test]
fn fixture_lambda_matches_dense_recomputation() {
    for (name, kind) in [
        ("tiny_ls.libsvm", LossKind::LeastSquares),
        ("tiny_logistic.libsvm", LossKind::Logistic),
    ] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let rows = naive_rows(&text);
        let n = 50;
        let mut atb = vec![0.0f64; n];
        let mut l1 = vec![0.0f64; n];
        for (label, feats) in &rows {
            for &(j, v) in feats {
                atb[j] += v * label;
                l1[j] += v.abs();
            }
        }
        let base = match kind {
            LossKind::LeastSquares => atb.iter().fold(0.0f64, |m, v| m.max(v.abs())),
            LossKind::Logistic => l1.iter().fold(0.0f64, |m, v| m.max(*v)),
        };
        let dataset = parse_libsvm(fixture(name), Some(n)).unwrap();
        assert_eq!(dataset.samples(), rows.len());
        assert_eq!(dataset.features(), n);
        let lam = lambda_from_scaling(&dataset, kind, 0.1).unwrap();
        assert!((lam - 0.1 * base).abs() <= 1e-12 * base, "{name}");
    }
}

#[test]
fn write_then_parse_round_trips() {
    let (dataset, _) = generate_dataset(&SyntheticSpec::least_squares(15, 25, 3, 9)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.libsvm");
    write_libsvm(&dataset, &path).unwrap();
    let back = parse_libsvm(&path, Some(25)).unwrap();
    assert_eq!(back.a, dataset.a);
    assert_eq!(back.b, dataset.b);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let err = parse_libsvm_str("1 1:2\n1 3:1 2:4\n", "t", None).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 2, .. }), "{err:?}");
    let err = parse_libsvm_str("1 0:2\n", "t", None).unwrap_err();
    assert!(matches!(err, Error::Parse { line: 1, .. }), "{err:?}");
    assert!(parse_libsvm_str("# only a comment\n\n", "t", None).is_err());
    assert!(parse_libsvm_str("1 5:1\n", "t", Some(3)).is_err());
}

#[test]
fn binary_labels_are_remapped() {
    let mut d = parse_libsvm_str("0 1:1\n1 2:1\n", "t", None).unwrap();
    assert!(d.remap_binary_labels());
    assert_eq!(d.b, vec![-1.0, 1.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn lambda_invariant_under_row_permutation(seed in any::<u64>(), logistic in any::<bool>()) {
        let kind = if logistic { LossKind::Logistic } else { LossKind::LeastSquares };
        let spec = SyntheticSpec { loss: kind, ..SyntheticSpec::least_squares(12, 20, 3, seed) };
        let (dataset, _) = generate_dataset(&spec).unwrap();
        let mut rng = common::rng(seed ^ 0xabcd);
        let mut perm: Vec<usize> = (0..12).collect();
        perm.shuffle(&mut rng);
        let permuted = Dataset {
            a: dataset.a.permute_rows(&perm).unwrap(),
            b: perm.iter().map(|&i| dataset.b[i]).collect(),
            name: dataset.name.clone(),
        };
        let lambda_c = 10f64.powf(rng.random_range(-3.0..0.0));
        let l1 = lambda_from_scaling(&dataset, kind, lambda_c).unwrap();
        let l2 = lambda_from_scaling(&permuted, kind, lambda_c).unwrap();
        prop_assert!((l1 - l2).abs() <= 1e-12 * l1);
    }

    #[test]
    fn vectors_round_trip(values in proptest::collection::vec(-1e300f64..1e300, 0..20)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.json");
        write_vector(&values, &path).unwrap();
        prop_assert_eq!(read_vector(&path).unwrap(), values);
    }
}

#[test]
fn json_summary_round_trips() {
    let dataset = parse_libsvm(fixture("tiny_ls.libsvm"), Some(50)).unwrap();
    let problem = problem_from(&dataset, LossKind::LeastSquares);
    let result = solve(&problem, &SolverConfig::hybrid()).unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&trace_json(&result).unwrap()).unwrap();
    let summary: TraceSummary = serde_json::from_value(doc["summary"].clone()).unwrap();
    assert_eq!(summary, TraceSummary::of(&result));
    assert_eq!(
        summary.nnz,
        result.x_final.iter().filter(|v| **v != 0.0).count()
    );
    assert_eq!(
        summary.iter_label,
        format!("{}({})", result.iterations, result.newton_iterations)
    );
    let trace = doc["trace"].as_array().unwrap();
    assert_eq!(trace.len(), result.trace.len());
    for (rec, orig) in trace.iter().zip(&result.trace) {
        assert_eq!(rec["F"].as_f64().unwrap(), orig.f);
    }
}

#[test]
fn csv_rows_match_trace() {
    let dataset = parse_libsvm(fixture("tiny_logistic.libsvm"), Some(50)).unwrap();
    let problem = problem_from(&dataset, LossKind::Logistic);
    let result = solve(&problem, &SolverConfig::hybrid()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    write_trace(&result, &path, TraceFormat::Csv).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, trace_csv(&result));
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), CSV_HEADER);
    let columns = CSV_HEADER.split(',').count();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), result.trace.len());
    for (row, rec) in rows.iter().zip(&result.trace) {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), columns);
        assert_eq!(fields[2].parse::<f64>().unwrap(), rec.f);
    }
}

#[test]
fn empty_trace_writes_header_only() {
    let dataset = parse_libsvm_str("0.0 1:1\n0.0 2:1\n", "zero", None).unwrap();
    let loss = LossModel::least_squares(dataset.b.clone()).unwrap();
    let problem = Problem::new(dataset.a, loss, 1.0, 0.5).unwrap();
    let result = solve(&problem, &SolverConfig::hybrid()).unwrap();
    assert!(result.trace.is_empty());
    assert_eq!(trace_csv(&result).trim_end(), CSV_HEADER);
}

#[test]
fn trace_format_parses() {
    assert_eq!("csv".parse::<TraceFormat>().unwrap(), TraceFormat::Csv);
    assert_eq!("json".parse::<TraceFormat>().unwrap(), TraceFormat::Json);
    assert!("xml".parse::<TraceFormat>().is_err());
}
