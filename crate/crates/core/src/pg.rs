//! Proximal-gradient step with monotone backtracking, and the
//! Barzilai–Borwein initial step-size rule.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::problem::Problem;
use crate::prox::{vector_prox, ProxParams};
use crate::subspace::{full_objective, full_psi_gradient};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgParams {
    /// Step-parameter inflation per backtrack, `τ̃ > 1`.
    pub tau_tilde: f64,
    /// Sufficient-decrease weight `α̃ > 0`.
    pub alpha_tilde: f64,
    pub mu_min: f64,
    pub mu_max: f64,
    pub max_backtracks: usize,
}

impl PgParams {
    /// Step-1 parameters of the hybrid solver.
    pub fn hybrid() -> Self {
        Self {
            tau_tilde: 10.0,
            alpha_tilde: 1e-8,
            mu_min: 1e-20,
            mu_max: 1e20,
            max_backtracks: 200,
        }
    }

    /// Baseline proximal-gradient parameters; identical except `τ̃ = 2`.
    pub fn baseline() -> Self {
        Self {
            tau_tilde: 2.0,
            ..Self::hybrid()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau_tilde > 1.0) {
            return Err(Error::InvalidParameter("tau_tilde must exceed 1".into()));
        }
        if !(self.alpha_tilde > 0.0) {
            return Err(Error::InvalidParameter(
                "alpha_tilde must be positive".into(),
            ));
        }
        if !(self.mu_min > 0.0 && self.mu_min <= self.mu_max) {
            return Err(Error::InvalidParameter("need 0 < mu_min <= mu_max".into()));
        }
        Ok(())
    }

    pub fn clamp_mu(&self, mu: f64) -> f64 {
        mu.clamp(self.mu_min, self.mu_max)
    }

    /// Initial step parameter `μ₀ = 1`, clamped into `[mu_min, mu_max]`.
    pub fn initial_mu(&self) -> f64 {
        self.clamp_mu(1.0)
    }
}

impl Default for PgParams {
    fn default() -> Self {
        Self::hybrid()
    }
}

/// Barzilai–Borwein step parameter
/// `clamp(⟨x − x_prev, g − g_prev⟩ / ‖x − x_prev‖², [mu_min, mu_max])`.
/// Nonpositive or non-finite curvature falls back to [`PgParams::initial_mu`].
pub fn bb_stepsize(x_prev: &[f64], x: &[f64], g_prev: &[f64], g: &[f64], p: &PgParams) -> f64 {
    let mut ss = 0.0;
    let mut sy = 0.0;
    for i in 0..x.len() {
        let s = x[i] - x_prev[i];
        ss += s * s;
        sy += s * (g[i] - g_prev[i]);
    }
    if ss == 0.0 {
        return p.initial_mu();
    }
    let mu = sy / ss;
    if !(mu > 0.0) || !mu.is_finite() {
        return p.initial_mu();
    }
    p.clamp_mu(mu)
}

/// Result of one proximal-gradient step: `(x̄, μ̄)` plus bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PgStep {
    pub x_bar: Vec<f64>,
    pub mu_bar: f64,
    pub f_bar: f64,
    pub backtracks: usize,
}

/// One proximal-gradient step from `x` with initial step parameter `mu`.
pub fn pg_step(x: &[f64], mu: f64, problem: &Problem, p: &PgParams) -> Result<PgStep> {
    let f_x = full_objective(x, problem)?;
    let grad = full_psi_gradient(x, problem)?;
    pg_step_with(x, f_x, &grad, mu, problem, p)
}

/// [`pg_step`] with `F(x)` and `∇ψ(x)` supplied by the caller.
///
/// Accepts the first `μ̄ = mu·τ̃^j` with
/// `F(x̄) ≤ F(x) − (α̃/2)‖x̄ − x‖²`, where `x̄ = prox(x − ∇ψ(x)/μ̄)`.
pub fn pg_step_with(
    x: &[f64],
    f_x: f64,
    grad: &[f64],
    mu: f64,
    problem: &Problem,
    p: &PgParams,
) -> Result<PgStep> {
    if !(mu > 0.0) || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "step parameter must be positive, got {mu}"
        )));
    }
    if !f_x.is_finite() {
        return Err(Error::NonFinite("objective at current iterate"));
    }
    let mut mu_l = mu;
    let mut trial = vec![0.0; x.len()];
    for backtracks in 0..=p.max_backtracks {
        let params = ProxParams::new(mu_l, problem.lam(), problem.q())?;
        for ((t, xi), gi) in trial.iter_mut().zip(x).zip(grad) {
            *t = xi - gi / mu_l;
        }
        let x_l = vector_prox(&trial, &params);
        let f_l = full_objective(&x_l, problem)?;
        let dist_sq: f64 = x_l.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        if f_l <= f_x - 0.5 * p.alpha_tilde * dist_sq {
            return Ok(PgStep {
                x_bar: x_l,
                mu_bar: mu_l,
                f_bar: f_l,
                backtracks,
            });
        }
        mu_l *= p.tau_tilde;
    }
    Err(Error::BacktrackExhausted(p.max_backtracks))
}

/// Linearized prox objective `⟨∇ψ(x), z − x⟩ + (μ/2)‖z − x‖² + λg(z)`.
pub fn prox_model(x: &[f64], z: &[f64], grad: &[f64], mu: f64, problem: &Problem) -> f64 {
    let diff: Vec<f64> = z.iter().zip(x).map(|(a, b)| a - b).collect();
    dot(grad, &diff) + 0.5 * mu * dot(&diff, &diff) + problem.penalty(z)
}
