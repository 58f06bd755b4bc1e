//! Python bindings for `sparseq`.

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

use sparseq::driver::practical_gamma;
use sparseq::io::trace_json;
use sparseq::linalg::SparseColumnMatrix;
use sparseq::{
    full_objective, lambda_from_scaling, parse_libsvm, residual_practical, solve_from,
    stationarity_report, LossKind, LossModel, ProxParams, SolverConfig, SolverKind,
};

create_exception!(pysparseq, SparseqError, PyException);

fn to_py(e: sparseq::Error) -> PyErr {
    SparseqError::new_err(e.to_string())
}

fn loss_kind(name: &str) -> PyResult<LossKind> {
    match name {
        "ls" | "least_squares" => Ok(LossKind::LeastSquares),
        "logistic" => Ok(LossKind::Logistic),
        other => Err(PyValueError::new_err(format!("unknown loss {other:?}"))),
    }
}

fn solver_kind(name: &str) -> PyResult<SolverKind> {
    match name {
        "hpgsrn" => Ok(SolverKind::Hpgsrn),
        "pgls" => Ok(SolverKind::Pgls),
        other => Err(PyValueError::new_err(format!("unknown solver {other:?}"))),
    }
}

/// An instance of `min f(Ax) + λ Σ|x_i|^q`.
#[pyclass(frozen, skip_from_py_object)]
struct Problem {
    inner: sparseq::Problem,
}

#[pymethods]
impl Problem {
    /// Dense row-major `a` with targets `b`. Give either `lam` or `lambda_c`.
    #[new]
    #[pyo3(signature = (a, b, loss="ls", lam=None, lambda_c=None, q=0.5))]
    fn new(
        a: Vec<Vec<f64>>,
        b: Vec<f64>,
        loss: &str,
        lam: Option<f64>,
        lambda_c: Option<f64>,
        q: f64,
    ) -> PyResult<Self> {
        let kind = loss_kind(loss)?;
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        if a.iter().any(|r| r.len() != cols) {
            return Err(PyValueError::new_err("rows of a differ in length"));
        }
        let flat: Vec<f64> = a.into_iter().flatten().collect();
        let matrix = SparseColumnMatrix::from_dense(rows, cols, &flat).map_err(to_py)?;
        let dataset = sparseq::Dataset {
            a: matrix,
            b,
            name: "dense".into(),
        };
        let lam = resolve_lambda(&dataset, kind, lam, lambda_c)?;
        build(dataset, kind, lam, q)
    }

    /// Loads a LIBSVM file; `λ = lambda_c` times the scaling base of the loss.
    #[staticmethod]
    #[pyo3(signature = (path, lambda_c, loss="ls", q=0.5, n_features=None))]
    fn from_libsvm(
        path: &str,
        lambda_c: f64,
        loss: &str,
        q: f64,
        n_features: Option<usize>,
    ) -> PyResult<Self> {
        let kind = loss_kind(loss)?;
        let mut dataset = parse_libsvm(path, n_features).map_err(to_py)?;
        if kind == LossKind::Logistic {
            dataset.remap_binary_labels();
        }
        let lam = lambda_from_scaling(&dataset, kind, lambda_c).map_err(to_py)?;
        build(dataset, kind, lam, q)
    }

    #[getter]
    fn lam(&self) -> f64 {
        self.inner.lam()
    }

    #[getter]
    fn q(&self) -> f64 {
        self.inner.q()
    }

    #[getter]
    fn samples(&self) -> usize {
        self.inner.samples()
    }

    #[getter]
    fn features(&self) -> usize {
        self.inner.features()
    }

    fn objective(&self, x: Vec<f64>) -> PyResult<f64> {
        full_objective(&x, &self.inner).map_err(to_py)
    }

    /// Practical residual at `gamma`, defaulting to `L/0.95`.
    #[pyo3(signature = (x, gamma=None))]
    fn residual(&self, x: Vec<f64>, gamma: Option<f64>) -> PyResult<f64> {
        let gamma = match gamma {
            Some(g) => g,
            None => practical_gamma(&self.inner, 0).map_err(to_py)?,
        };
        residual_practical(&x, &self.inner, gamma).map_err(to_py)
    }

    /// Residuals over `gammas` and the minimum, as `(pairs, min)`.
    fn stationarity(&self, x: Vec<f64>, gammas: Vec<f64>) -> PyResult<(Vec<(f64, f64)>, f64)> {
        let report = stationarity_report(&x, &self.inner, &gammas).map_err(to_py)?;
        Ok((report.residuals, report.min_residual))
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(samples={}, features={}, lam={:e}, q={})",
            self.inner.samples(),
            self.inner.features(),
            self.inner.lam(),
            self.inner.q()
        )
    }
}

fn resolve_lambda(
    dataset: &sparseq::Dataset,
    kind: LossKind,
    lam: Option<f64>,
    lambda_c: Option<f64>,
) -> PyResult<f64> {
    match (lam, lambda_c) {
        (Some(l), None) => Ok(l),
        (None, Some(c)) => lambda_from_scaling(dataset, kind, c).map_err(to_py),
        _ => Err(PyValueError::new_err(
            "give exactly one of lam and lambda_c",
        )),
    }
}

fn build(dataset: sparseq::Dataset, kind: LossKind, lam: f64, q: f64) -> PyResult<Problem> {
    let loss = LossModel::new(kind, dataset.b).map_err(to_py)?;
    let inner = sparseq::Problem::new(dataset.a, loss, lam, q).map_err(to_py)?;
    Ok(Problem { inner })
}

#[pyclass(frozen, skip_from_py_object)]
struct SolveResult {
    inner: sparseq::SolveResult,
}

#[pymethods]
impl SolveResult {
    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x_final.clone()
    }

    #[getter]
    fn f_final(&self) -> f64 {
        self.inner.f_final
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn newton_iterations(&self) -> usize {
        self.inner.newton_iterations
    }

    #[getter]
    fn status(&self) -> String {
        self.inner.status.to_string()
    }

    #[getter]
    fn error(&self) -> Option<String> {
        self.inner.error.as_ref().map(ToString::to_string)
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    #[getter]
    fn time_seconds(&self) -> f64 {
        self.inner.time_seconds
    }

    /// `"M(N)"`: total iterations and Newton steps.
    fn iteration_label(&self) -> String {
        self.inner.iteration_label()
    }

    /// The summary and per-iteration trace as a JSON document.
    fn trace_json(&self) -> PyResult<String> {
        let bytes = trace_json(&self.inner).map_err(to_py)?;
        String::from_utf8(bytes).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(status={}, iter={}, F={:.6e}, nnz={})",
            self.inner.status,
            self.inner.iteration_label(),
            self.inner.f_final,
            self.inner.nnz()
        )
    }
}

#[pyfunction]
#[pyo3(signature = (problem, solver="hpgsrn", tol=1e-3, max_iters=50_000, x0=None, record_time=true))]
fn solve(
    py: Python<'_>,
    problem: &Problem,
    solver: &str,
    tol: f64,
    max_iters: usize,
    x0: Option<Vec<f64>>,
    record_time: bool,
) -> PyResult<SolveResult> {
    let config = SolverConfig {
        practical_tol: tol,
        max_iters,
        record_time,
        ..SolverConfig::for_kind(solver_kind(solver)?)
    };
    let x0 = x0.unwrap_or_else(|| vec![0.0; problem.inner.features()]);
    let inner = py
        .detach(|| solve_from(&problem.inner, &config, &x0))
        .map_err(to_py)?;
    Ok(SolveResult { inner })
}

/// Coordinatewise global minimizer of `(γ/2)(t − s)² + λ|t|^q`.
#[pyfunction]
fn prox(values: Vec<f64>, gamma: f64, lam: f64, q: f64) -> PyResult<Vec<f64>> {
    let params = ProxParams::new(gamma, lam, q).map_err(to_py)?;
    Ok(sparseq::vector_prox(&values, &params))
}

/// `λ` for a LIBSVM file under the scaling rule of `loss`.
#[pyfunction]
#[pyo3(name = "lambda_from_scaling", signature = (path, lambda_c, loss="ls", n_features=None))]
fn lambda_for_file(
    path: &str,
    lambda_c: f64,
    loss: &str,
    n_features: Option<usize>,
) -> PyResult<f64> {
    let kind = loss_kind(loss)?;
    let mut dataset = parse_libsvm(path, n_features).map_err(to_py)?;
    if kind == LossKind::Logistic {
        dataset.remap_binary_labels();
    }
    lambda_from_scaling(&dataset, kind, lambda_c).map_err(to_py)
}

#[pymodule]
fn pysparseq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Problem>()?;
    m.add_class::<SolveResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(prox, m)?)?;
    m.add_function(wrap_pyfunction!(lambda_for_file, m)?)?;
    m.add("SparseqError", m.py().get_type::<SparseqError>())?;
    Ok(())
}
