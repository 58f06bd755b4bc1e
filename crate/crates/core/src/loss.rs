//! Smooth losses `f(z)` evaluated at `z = Ax`.
//!
//! Both built-in losses are separable in `z`, so their Hessians are diagonal
//! and the composite Hessian of `x ↦ f(Ax)` is `Aᵀ D A`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm_sq, SparseColumnMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    LeastSquares,
    Logistic,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LossKind::LeastSquares => f.pad("least_squares"),
            LossKind::Logistic => f.pad("logistic"),
        }
    }
}

/// A twice differentiable loss with diagonal Hessian. Implement this to plug
/// a custom loss into the solver; input lengths are checked by [`LossModel`].
pub trait SeparableLoss: fmt::Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, z: &[f64]) -> f64;
    fn gradient(&self, z: &[f64]) -> Vec<f64>;
    fn hessian_diagonal(&self, z: &[f64]) -> Vec<f64>;
    /// `inf f`.
    fn lower_bound(&self) -> f64;
    /// `sup_z max_i ∇²f(z)_ii`, if known. Scales `‖A‖²` into a Lipschitz
    /// constant for `Aᵀ∇f(A·)`.
    fn curvature_bound(&self) -> Option<f64>;
}

#[derive(Debug, Clone)]
pub enum LossModel {
    /// `½‖z − b‖²`
    LeastSquares {
        b: Vec<f64>,
    },
    /// `Σ log(1 + exp(−b_i z_i))` with labels `b_i ∈ {−1, +1}`
    Logistic {
        b: Vec<f64>,
    },
    Custom(Arc<dyn SeparableLoss>),
}

impl LossModel {
    pub fn least_squares(b: Vec<f64>) -> Result<Self> {
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target"));
        }
        Ok(LossModel::LeastSquares { b })
    }

    pub fn logistic(b: Vec<f64>) -> Result<Self> {
        if let Some(bad) = b.iter().find(|&&v| v != 1.0 && v != -1.0) {
            return Err(Error::InvalidParameter(format!(
                "logistic labels must be -1 or +1, found {bad}"
            )));
        }
        Ok(LossModel::Logistic { b })
    }

    pub fn new(kind: LossKind, b: Vec<f64>) -> Result<Self> {
        match kind {
            LossKind::LeastSquares => Self::least_squares(b),
            LossKind::Logistic => Self::logistic(b),
        }
    }

    pub fn custom(loss: Arc<dyn SeparableLoss>) -> Self {
        LossModel::Custom(loss)
    }

    pub fn kind(&self) -> Option<LossKind> {
        match self {
            LossModel::LeastSquares { .. } => Some(LossKind::LeastSquares),
            LossModel::Logistic { .. } => Some(LossKind::Logistic),
            LossModel::Custom(_) => None,
        }
    }

    pub fn targets(&self) -> Option<&[f64]> {
        match self {
            LossModel::LeastSquares { b } | LossModel::Logistic { b } => Some(b),
            LossModel::Custom(_) => None,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            LossModel::LeastSquares { b } | LossModel::Logistic { b } => b.len(),
            LossModel::Custom(l) => l.dim(),
        }
    }

    /// `c_f = inf f`; zero for both built-in losses.
    pub fn lower_bound(&self) -> f64 {
        match self {
            LossModel::LeastSquares { .. } | LossModel::Logistic { .. } => 0.0,
            LossModel::Custom(l) => l.lower_bound(),
        }
    }

    fn check(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    pub fn value(&self, z: &[f64]) -> Result<f64> {
        self.check(z)?;
        Ok(match self {
            LossModel::LeastSquares { b } => {
                0.5 * z
                    .iter()
                    .zip(b)
                    .map(|(zi, bi)| (zi - bi) * (zi - bi))
                    .sum::<f64>()
            }
            LossModel::Logistic { b } => z.iter().zip(b).map(|(zi, bi)| softplus(-bi * zi)).sum(),
            LossModel::Custom(l) => l.value(z),
        })
    }

    pub fn gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        Ok(match self {
            LossModel::LeastSquares { b } => z.iter().zip(b).map(|(zi, bi)| zi - bi).collect(),
            LossModel::Logistic { b } => z
                .iter()
                .zip(b)
                .map(|(zi, bi)| -bi * sigmoid(-bi * zi))
                .collect(),
            LossModel::Custom(l) => l.gradient(z),
        })
    }

    pub fn hessian_diagonal(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        Ok(match self {
            LossModel::LeastSquares { .. } => vec![1.0; z.len()],
            LossModel::Logistic { b } => z
                .iter()
                .zip(b)
                .map(|(zi, bi)| sigmoid(bi * zi) * sigmoid(-bi * zi))
                .collect(),
            LossModel::Custom(l) => l.hessian_diagonal(z),
        })
    }

    pub fn curvature_bound(&self) -> Option<f64> {
        match self {
            LossModel::LeastSquares { .. } => Some(1.0),
            LossModel::Logistic { .. } => Some(0.25),
            LossModel::Custom(l) => l.curvature_bound(),
        }
    }
}

/// `log(1 + e^u)` without overflow.
pub fn softplus(u: f64) -> f64 {
    if u > 0.0 {
        u + (-u).exp().ln_1p()
    } else {
        u.exp().ln_1p()
    }
}

/// `1 / (1 + e^{−v})` without overflow.
pub fn sigmoid(v: f64) -> f64 {
    if v >= 0.0 {
        1.0 / (1.0 + (-v).exp())
    } else {
        let e = v.exp();
        e / (1.0 + e)
    }
}

/// Power-iteration settings used for `‖A‖²`.
pub const LIPSCHITZ_TOL: f64 = 1e-6;
pub const LIPSCHITZ_MAX_ITERS: usize = 10_000;

/// Lipschitz constant of `x ↦ Aᵀ∇f(Ax)`: `‖A‖²` for least squares,
/// `0.25‖A‖²` for logistic, `curvature_bound·‖A‖²` for custom losses.
pub fn lipschitz_estimate(loss: &LossModel, a: &SparseColumnMatrix, seed: u64) -> Result<f64> {
    if a.rows() != loss.dim() {
        return Err(Error::DimensionMismatch {
            expected: loss.dim(),
            got: a.rows(),
        });
    }
    let factor = loss
        .curvature_bound()
        .ok_or_else(|| Error::InvalidParameter("loss has no curvature bound".into()))?;
    Ok(factor * spectral_norm_sq(a, LIPSCHITZ_TOL, LIPSCHITZ_MAX_ITERS, seed)?)
}
