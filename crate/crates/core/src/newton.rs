//! Regularized subspace Newton direction and Armijo backtracking on `F_S`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    dot, norm2, smallest_eigenvalue, smallest_eigenvalue_operator, solve_spd_cg, solve_spd_direct,
    DenseSymmetricMatrix, EigenOptions, FnOperator, SymmetricOperator, DEFAULT_CG_REL_TOL,
    DENSE_CUTOFF,
};
use crate::problem::Problem;
use crate::subspace::{SubspaceView, SUPPORT_FLOOR};

/// Regularization retries before the Newton system is declared unsolvable.
pub const MAX_REGULARIZATION_RETRIES: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NewtonParams {
    /// Exponent on the gradient norm in the regularization shift, `σ ∈ (0, ½]`.
    pub sigma: f64,
    /// Multiplier on the eigenvalue lift, `b₁ > 1`.
    pub b1: f64,
    /// Multiplier on `‖r‖^σ`, `b₂ > 0`.
    pub b2: f64,
    /// Armijo slope fraction `ϱ ∈ (0, ½)`.
    pub varrho: f64,
    /// Backtracking ratio `β ∈ (0, 1)`.
    pub beta: f64,
    /// Supports of at least this size use conjugate gradients and Lanczos.
    pub dense_cutoff: usize,
    pub cg_rel_tol: f64,
    pub max_armijo: usize,
    /// Absolute eigenvalue accuracy, scaled by `max(1, ‖H‖)`.
    pub eig_tol: f64,
}

impl Default for NewtonParams {
    fn default() -> Self {
        Self {
            sigma: 0.5,
            b1: 1.0 + 1e-8,
            b2: 1e-3,
            varrho: 1e-4,
            beta: 0.5,
            dense_cutoff: DENSE_CUTOFF,
            cg_rel_tol: DEFAULT_CG_REL_TOL,
            max_armijo: 60,
            eig_tol: 1e-6,
        }
    }
}

impl NewtonParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParameter(msg.into()));
        if !(self.sigma > 0.0 && self.sigma <= 0.5) {
            return bad("sigma must lie in (0, 0.5]");
        }
        if !(self.b1 > 1.0) {
            return bad("b1 must exceed 1");
        }
        if !(self.b2 > 0.0) {
            return bad("b2 must be positive");
        }
        if !(self.varrho > 0.0 && self.varrho < 0.5) {
            return bad("varrho must lie in (0, 0.5)");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in (0, 1)");
        }
        if !(self.cg_rel_tol > 0.0) {
            return bad("cg_rel_tol must be positive");
        }
        if self.max_armijo == 0 {
            return bad("max_armijo must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonDirection {
    /// `d_S`, solving `(H + shift·I) d = −r`.
    pub direction: Vec<f64>,
    /// `r = ∇F_S(u)`.
    pub gradient: Vec<f64>,
    /// The eigenvalue lift `ζ` in effect for the accepted solve.
    pub zeta: f64,
    pub grad_norm: f64,
    /// `b₁ζ + b₂‖r‖^σ`.
    pub shift: f64,
    /// `‖G d + r‖` for the accepted direction.
    pub residual_norm: f64,
    pub used_cg: bool,
    pub retries: usize,
}

impl NewtonDirection {
    /// `⟨r, d⟩`.
    pub fn slope(&self) -> f64 {
        dot(&self.gradient, &self.direction)
    }

    /// `−⟨r, d⟩ / (‖r‖‖d‖)`.
    pub fn cosine(&self) -> f64 {
        -self.slope() / (self.grad_norm * norm2(&self.direction))
    }
}

/// Solves `G d = −r` with `G = ∇²F_S(u) + (b₁ζ + b₂‖r‖^σ)I` and
/// `ζ = [−λ_min(∇²F_S(u))]₊`.
///
/// Supports smaller than `dense_cutoff` assemble the Hessian and factor it;
/// larger ones use the operator form with CG. On a failed factorization or a
/// non-descent direction, `ζ ← 2ζ + b₂‖r‖^σ` and the solve is retried.
pub fn newton_direction(
    view: &SubspaceView,
    problem: &Problem,
    p: &NewtonParams,
) -> Result<NewtonDirection> {
    if view.dim() == 0 {
        return Err(Error::InvalidParameter("empty support".into()));
    }
    let r = view.gradient(problem)?;
    if view.dim() < p.dense_cutoff {
        let h = view.hessian_dense(problem)?;
        regularized_newton_dense(&h, r, p)
    } else {
        let hess = view.hessian_operator(problem)?;
        regularized_newton_operator(&hess, r, p)
    }
}

fn check_gradient(r: &[f64]) -> Result<f64> {
    let grad_norm = norm2(r);
    if grad_norm == 0.0 {
        return Err(Error::ZeroGradient);
    }
    if !grad_norm.is_finite() {
        return Err(Error::NonFinite("subspace gradient"));
    }
    Ok(grad_norm)
}

fn eigen_options(p: &NewtonParams) -> EigenOptions {
    EigenOptions {
        tol: p.eig_tol,
        dense_cutoff: p.dense_cutoff,
        ..EigenOptions::default()
    }
}

fn lowest_eigenvalue(res: Result<f64>) -> Result<f64> {
    match res {
        Err(Error::NoConvergence { estimate, .. }) => Ok(estimate),
        other => other,
    }
}

/// Regularized Newton solve for an assembled Hessian `h` and gradient `r`,
/// by Cholesky factorization.
pub fn regularized_newton_dense(
    h: &DenseSymmetricMatrix,
    r: Vec<f64>,
    p: &NewtonParams,
) -> Result<NewtonDirection> {
    let grad_norm = check_gradient(&r)?;
    let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    let base = p.b2 * grad_norm.powf(p.sigma);
    let mut zeta = (-lowest_eigenvalue(smallest_eigenvalue(h, &eigen_options(p)))?).max(0.0);
    for retries in 0..=MAX_REGULARIZATION_RETRIES {
        let shift = p.b1 * zeta + base;
        let mut g = h.clone();
        g.add_diagonal(shift);
        match solve_spd_direct(&g, &rhs) {
            Ok(d) if dot(&r, &d) < 0.0 => {
                let gd = g.mul_vec(&d);
                let residual_norm =
                    norm2(&gd.iter().zip(&r).map(|(a, b)| a + b).collect::<Vec<_>>());
                return Ok(NewtonDirection {
                    direction: d,
                    gradient: r,
                    zeta,
                    grad_norm,
                    shift,
                    residual_norm,
                    used_cg: false,
                    retries,
                });
            }
            Ok(_) | Err(Error::NotPositiveDefinite { .. }) | Err(Error::NonFinite(_)) => {
                zeta = 2.0 * zeta + base;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::SolveFailure {
        retries: MAX_REGULARIZATION_RETRIES,
    })
}

/// Regularized Newton solve for a Hessian given as an operator, by conjugate
/// gradients. An inexact CG result is accepted only if it is a descent
/// direction.
pub fn regularized_newton_operator<O: SymmetricOperator + ?Sized>(
    hess: &O,
    r: Vec<f64>,
    p: &NewtonParams,
) -> Result<NewtonDirection> {
    let grad_norm = check_gradient(&r)?;
    let k = hess.order();
    let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
    let base = p.b2 * grad_norm.powf(p.sigma);
    let mut zeta =
        (-lowest_eigenvalue(smallest_eigenvalue_operator(hess, &eigen_options(p)))?).max(0.0);
    for retries in 0..=MAX_REGULARIZATION_RETRIES {
        let shift = p.b1 * zeta + base;
        let g = FnOperator::new(k, |v: &[f64], out: &mut [f64]| {
            hess.apply(v, out);
            for (o, vi) in out.iter_mut().zip(v) {
                *o += shift * vi;
            }
        });
        let sol = solve_spd_cg(&g, &rhs, p.cg_rel_tol, None)?;
        let d = sol.solution;
        if dot(&r, &d) < 0.0 && d.iter().all(|v| v.is_finite()) {
            let mut gd = vec![0.0; k];
            g.apply(&d, &mut gd);
            let residual_norm = norm2(&gd.iter().zip(&r).map(|(a, b)| a + b).collect::<Vec<_>>());
            return Ok(NewtonDirection {
                direction: d,
                gradient: r,
                zeta,
                grad_norm,
                shift,
                residual_norm,
                used_cg: true,
                retries,
            });
        }
        zeta = 2.0 * zeta + base;
    }
    Err(Error::SolveFailure {
        retries: MAX_REGULARIZATION_RETRIES,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmijoStep {
    /// `β^m` for the accepted `m`.
    pub alpha: f64,
    pub u_next: Vec<f64>,
    /// `F_S(u_next)`.
    pub value: f64,
    /// `F_S(u)` at the start of the search.
    pub start_value: f64,
    pub probes: usize,
}

/// Finds the smallest `m ≥ 0` with
/// `F_S(u + β^m d) ≤ F_S(u) + ϱβ^m⟨r, d⟩`. Trial points with a coordinate
/// below [`SUPPORT_FLOOR`] in magnitude count as failures.
pub fn armijo_search(
    view: &SubspaceView,
    d: &[f64],
    r: &[f64],
    problem: &Problem,
    p: &NewtonParams,
) -> Result<ArmijoStep> {
    let slope = dot(r, d);
    if !(slope < 0.0) {
        return Err(Error::InvalidParameter(
            "Armijo search needs a descent direction".into(),
        ));
    }
    let u = view.point();
    if d.len() != u.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: d.len(),
        });
    }
    let start_value = view.value(problem)?;
    let mut alpha = 1.0;
    for m in 0..p.max_armijo {
        let trial: Vec<f64> = u.iter().zip(d).map(|(ui, di)| ui + alpha * di).collect();
        if trial.iter().all(|v| v.abs() >= SUPPORT_FLOOR) {
            let value = view.value_at(&trial, problem)?;
            if value <= start_value + p.varrho * alpha * slope {
                return Ok(ArmijoStep {
                    alpha,
                    u_next: trial,
                    value,
                    start_value,
                    probes: m + 1,
                });
            }
        }
        alpha *= p.beta;
    }
    Err(Error::ArmijoExhausted(p.max_armijo))
}
