"""Smoke test for the pysparseq extension.

Build first, e.g. ``maturin develop -m crates/python/Cargo.toml``, or copy
``target/release/libpysparseq.so`` to ``pysparseq.so`` on ``PYTHONPATH``.
"""

import json
import math
import pathlib

import pysparseq

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def check_prox():
    out = pysparseq.prox([0.0, 0.3, 10.0, -10.0], 1.0, 1.0, 0.5)
    assert out[0] == 0.0 and out[1] == 0.0
    assert out[3] == -out[2]
    t = out[2]
    assert abs(t - 10.0 + 0.5 / math.sqrt(t)) < 1e-12


def check_fixture(name, loss):
    path = str(FIXTURES / name)
    problem = pysparseq.Problem.from_libsvm(path, 0.01, loss=loss, n_features=50)
    lam = pysparseq.lambda_from_scaling(path, 0.01, loss=loss, n_features=50)
    assert problem.lam == lam
    for solver in ("hpgsrn", "pgls"):
        result = pysparseq.solve(problem, solver=solver, record_time=False)
        assert result.status == "converged", result
        assert problem.residual(result.x) <= 1e-3
        assert abs(problem.objective(result.x) - result.f_final) <= 1e-12 * max(1.0, abs(result.f_final))
        doc = json.loads(result.trace_json())
        assert len(doc["trace"]) == result.iterations
        if solver == "pgls":
            assert result.newton_iterations == 0
        print(f"{name} {solver}: {result!r}")


def check_dense():
    a = [[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]]
    b = [1.0, -2.0, 0.5]
    problem = pysparseq.Problem(a, b, lam=0.05, q=0.5)
    result = pysparseq.solve(problem)
    assert result.status == "converged"
    pairs, best = problem.stationarity(result.x, [1.0, 10.0])
    assert len(pairs) == 2 and best <= 1e-3
    try:
        pysparseq.Problem(a, b, lam=0.05, q=1.5)
    except pysparseq.SparseqError:
        pass
    else:
        raise AssertionError("q outside (0, 1) accepted")


if __name__ == "__main__":
    check_prox()
    check_fixture("tiny_ls.libsvm", "ls")
    check_fixture("tiny_logistic.libsvm", "logistic")
    check_dense()
    print("smoke test passed")
