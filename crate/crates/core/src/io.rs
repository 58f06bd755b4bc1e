//! LIBSVM ingestion, λ scaling, and trace serialization.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::driver::{SolveResult, TraceRecord};
use crate::error::{Error, Result};
use crate::linalg::SparseColumnMatrix;
use crate::loss::LossKind;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub a: SparseColumnMatrix,
    pub b: Vec<f64>,
    pub name: String,
}

impl Dataset {
    pub fn samples(&self) -> usize {
        self.a.rows()
    }

    pub fn features(&self) -> usize {
        self.a.cols()
    }

    /// Maps labels in `{0, 1}` to `{−1, +1}`. Returns whether anything changed.
    pub fn remap_binary_labels(&mut self) -> bool {
        let has_zero = self.b.contains(&0.0);
        if !has_zero || !self.b.iter().all(|v| *v == 0.0 || *v == 1.0) {
            return false;
        }
        log::warn!("{}: labels {{0, 1}} remapped to {{-1, +1}}", self.name);
        for v in &mut self.b {
            *v = if *v == 0.0 { -1.0 } else { 1.0 };
        }
        true
    }
}

fn parse_error(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

/// Parses LIBSVM text. `n_features` may widen, but not narrow, the column
/// count implied by the largest index.
pub fn parse_libsvm_str(text: &str, name: &str, n_features: Option<usize>) -> Result<Dataset> {
    let mut triplets = Vec::new();
    let mut labels = Vec::new();
    let mut max_index = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let label_tok = tokens
            .next()
            .ok_or_else(|| parse_error(lineno, "missing label"))?;
        let label: f64 = label_tok
            .parse()
            .map_err(|_| parse_error(lineno, format!("bad label {label_tok:?}")))?;
        if !label.is_finite() {
            return Err(parse_error(lineno, "non-finite label"));
        }
        let row = labels.len();
        let mut last = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| parse_error(lineno, format!("expected index:value, got {tok:?}")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| parse_error(lineno, format!("bad index {idx:?}")))?;
            if idx == 0 {
                return Err(parse_error(lineno, "indices are 1-based"));
            }
            if idx == last {
                return Err(parse_error(lineno, format!("duplicate index {idx}")));
            }
            if idx < last {
                return Err(parse_error(lineno, format!("index {idx} follows {last}")));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| parse_error(lineno, format!("bad value {val:?}")))?;
            if !val.is_finite() {
                return Err(parse_error(lineno, "non-finite value"));
            }
            last = idx;
            max_index = max_index.max(idx);
            if val != 0.0 {
                triplets.push((row, idx - 1, val));
            }
        }
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(Error::EmptyFile);
    }
    let n = match n_features {
        Some(n) if n < max_index => {
            return Err(Error::InvalidParameter(format!(
                "feature override {n} is below the largest index {max_index}"
            )))
        }
        Some(n) => n,
        None => max_index,
    };
    if n == 0 {
        return Err(Error::InvalidParameter("dataset has no features".into()));
    }
    let a = SparseColumnMatrix::from_triplets(labels.len(), n, &triplets)?;
    Ok(Dataset {
        a,
        b: labels,
        name: name.to_string(),
    })
}

pub fn parse_libsvm(path: impl AsRef<Path>, n_features: Option<usize>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_libsvm_str(&text, &name, n_features)
}

/// Writes values with `{:?}`, which round-trips exactly through `parse`.
pub fn write_libsvm(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for (i, row) in dataset.a.row_lists().iter().enumerate() {
        write!(out, "{:?}", dataset.b[i])?;
        for (j, v) in row {
            write!(out, " {}:{:?}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    out.flush()?;
    Ok(())
}

/// `λ_c‖Aᵀb‖_∞` for least squares, `λ_c max_j ‖A_j‖₁` for logistic.
pub fn lambda_from_scaling(dataset: &Dataset, kind: LossKind, lambda_c: f64) -> Result<f64> {
    if !(lambda_c > 0.0 && lambda_c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda_c must be positive, got {lambda_c}"
        )));
    }
    let base = match kind {
        LossKind::LeastSquares => dataset
            .a
            .tr_mul_vec(&dataset.b)?
            .iter()
            .fold(0.0, |m: f64, v| m.max(v.abs())),
        LossKind::Logistic => dataset.a.column_l1_norms().into_iter().fold(0.0, f64::max),
    };
    if base == 0.0 {
        return Err(Error::DegenerateScale);
    }
    Ok(lambda_c * base)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceFormat {
    Csv,
    Json,
}

impl std::str::FromStr for TraceFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::InvalidParameter(format!(
                "unknown trace format {other:?}"
            ))),
        }
    }
}

/// `{:.16e}`: 17 significant digits, enough to round-trip any `f64`.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

struct FixedDigits;

impl serde_json::ser::Formatter for FixedDigits {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        writer.write_all(format_real(value).as_bytes())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct TraceSummary {
    pub iterations: usize,
    pub newton_iterations: usize,
    /// `"M(N)"`: total iterations and Newton steps.
    pub iter_label: String,
    pub status: String,
    #[serde(rename = "F_final")]
    pub f_final: f64,
    pub nnz: usize,
    pub time_seconds: f64,
}

impl TraceSummary {
    pub fn of(result: &SolveResult) -> Self {
        Self {
            iterations: result.iterations,
            newton_iterations: result.newton_iterations,
            iter_label: result.iteration_label(),
            status: result.status.to_string(),
            f_final: result.f_final,
            nnz: result.nnz(),
            time_seconds: result.time_seconds,
        }
    }
}

#[derive(Serialize)]
struct TraceDocument<'a> {
    summary: TraceSummary,
    trace: &'a [TraceRecord],
}

pub fn trace_json(result: &SolveResult) -> Result<Vec<u8>> {
    let doc = TraceDocument {
        summary: TraceSummary::of(result),
        trace: &result.trace,
    };
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    doc.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(buf)
}

pub const CSV_HEADER: &str =
    "k,step,F,residual,support,mu_bar,zeta,alpha,backtracks,cosine,elapsed";

pub fn trace_csv(result: &SolveResult) -> String {
    let opt = |v: Option<f64>| v.map(format_real).unwrap_or_default();
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &result.trace {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.k,
            r.step,
            format_real(r.f),
            format_real(r.residual),
            r.support,
            format_real(r.mu_bar),
            opt(r.zeta),
            opt(r.alpha),
            r.backtracks,
            opt(r.cosine),
            format_real(r.elapsed),
        ));
    }
    out
}

pub fn write_trace(
    result: &SolveResult,
    path: impl AsRef<Path>,
    format: TraceFormat,
) -> Result<()> {
    let bytes = match format {
        TraceFormat::Csv => trace_csv(result).into_bytes(),
        TraceFormat::Json => trace_json(result)?,
    };
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a JSON array of numbers.
pub fn read_vector(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_vector(x: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits);
    x.serialize(&mut ser)?;
    buf.push(b'\n');
    fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_line() {
        let d = parse_libsvm_str("-1 3:2.5 7:1\n", "t", None).unwrap();
        assert_eq!(d.b, vec![-1.0]);
        assert_eq!(d.features(), 7);
        assert_eq!(d.a.to_dense(), vec![0.0, 0.0, 2.5, 0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn comments_and_blank_lines() {
        let d =
            parse_libsvm_str("# header\n\n1 1:1 # trailing\n  \n0 2:3\n", "t", Some(4)).unwrap();
        assert_eq!(d.samples(), 2);
        assert_eq!(d.features(), 4);
    }

    #[test]
    fn out_of_order_and_duplicate() {
        assert!(matches!(
            parse_libsvm_str("1 1:1\n1 3:1 2:1\n", "t", None),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            parse_libsvm_str("1 2:1 2:1\n", "t", None),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn malformed() {
        for bad in ["x 1:1", "1 1-1", "1 0:1", "1 a:1", "1 1:b", "1 1:inf"] {
            assert!(
                matches!(
                    parse_libsvm_str(bad, "t", None),
                    Err(Error::Parse { line: 1, .. })
                ),
                "{bad}"
            );
        }
        assert_eq!(
            parse_libsvm_str("# only\n\n", "t", None),
            Err(Error::EmptyFile)
        );
        assert!(parse_libsvm_str("1 5:1", "t", Some(3)).is_err());
    }

    #[test]
    fn label_remap() {
        let mut d = parse_libsvm_str("0 1:1\n1 1:2\n", "t", None).unwrap();
        assert!(d.remap_binary_labels());
        assert_eq!(d.b, vec![-1.0, 1.0]);
        assert!(!d.remap_binary_labels());
    }

    #[test]
    fn scaling_examples() {
        let d = Dataset {
            a: SparseColumnMatrix::identity(2),
            b: vec![3.0, -1.0],
            name: "t".into(),
        };
        assert!(
            (lambda_from_scaling(&d, LossKind::LeastSquares, 0.1).unwrap() - 0.3).abs() < 1e-15
        );
        let d = Dataset {
            a: SparseColumnMatrix::from_dense(2, 2, &[1.0, -3.0, -1.0, 2.0]).unwrap(),
            b: vec![1.0, -1.0],
            name: "t".into(),
        };
        assert!((lambda_from_scaling(&d, LossKind::Logistic, 0.01).unwrap() - 0.05).abs() < 1e-15);
        let d = Dataset {
            a: SparseColumnMatrix::from_dense(1, 2, &[0.0, 0.0]).unwrap(),
            b: vec![1.0],
            name: "t".into(),
        };
        assert_eq!(
            lambda_from_scaling(&d, LossKind::Logistic, 0.01),
            Err(Error::DegenerateScale)
        );
    }

    #[test]
    fn real_formatting() {
        assert_eq!(format_real(1.0), "1.0000000000000000e0");
        let v = 0.1 + 0.2;
        assert_eq!(format_real(v).parse::<f64>().unwrap(), v);
    }
}
