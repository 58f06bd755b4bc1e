use crate::error::{Error, Result};
use crate::linalg::SparseColumnMatrix;
use crate::loss::LossModel;

/// One instance of `min_x f(Ax) + λ‖x‖_q^q`.
#[derive(Debug, Clone)]
pub struct Problem {
    a: SparseColumnMatrix,
    loss: LossModel,
    lam: f64,
    q: f64,
}

impl Problem {
    pub fn new(a: SparseColumnMatrix, loss: LossModel, lam: f64, q: f64) -> Result<Self> {
        if a.rows() != loss.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.rows(),
                got: loss.dim(),
            });
        }
        if a.rows() == 0 || a.cols() == 0 {
            return Err(Error::InvalidParameter(
                "data matrix must be non-empty".into(),
            ));
        }
        if !(lam > 0.0 && lam.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lam}"
            )));
        }
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "q must lie in (0, 1), got {q}"
            )));
        }
        Ok(Self { a, loss, lam, q })
    }

    pub fn matrix(&self) -> &SparseColumnMatrix {
        &self.a
    }

    pub fn loss(&self) -> &LossModel {
        &self.loss
    }

    pub fn lam(&self) -> f64 {
        self.lam
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Number of samples `m`.
    pub fn samples(&self) -> usize {
        self.a.rows()
    }

    /// Number of features `n`.
    pub fn features(&self) -> usize {
        self.a.cols()
    }

    /// `λ Σ |x_i|^q`, accumulated over nonzeros in index order.
    pub fn penalty(&self, x: &[f64]) -> f64 {
        self.lam
            * x.iter()
                .filter(|v| **v != 0.0)
                .map(|v| v.abs().powf(self.q))
                .sum::<f64>()
    }
}
