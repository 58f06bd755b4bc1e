//! The hybrid solver loop and the proximal-gradient baseline.
//!
//! Every iteration takes a proximal-gradient step from `x^k` to obtain
//! `(x̄^k, μ̄_k)`. If the stopping test passes, `x^k` is returned. Otherwise,
//! when the sign pattern of `x̄^k` matches `x^k` and the curvature test holds,
//! a regularized Newton step on `supp(x^k)` with Armijo backtracking produces
//! `x^{k+1}`; else `x^{k+1} = x̄^k`. The baseline never switches.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{norm2, norm_inf};
use crate::loss::lipschitz_estimate;
use crate::newton::{armijo_search, newton_direction, NewtonParams};
use crate::pg::{bb_stepsize, pg_step_with, PgParams};
use crate::problem::Problem;
use crate::prox::{vector_prox, ProxParams};
use crate::subspace::{full_objective, full_psi_gradient, SubspaceView, SupportSet};

/// `γ = L / LIPSCHITZ_MARGIN` in the practical stopping test.
pub const LIPSCHITZ_MARGIN: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverKind {
    Hpgsrn,
    Pgls,
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SolverKind::Hpgsrn => "hpgsrn",
            SolverKind::Pgls => "pgls",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StoppingMode {
    /// `μ̄_k‖x^k − x̄^k‖_∞ ≤ ε`
    S2,
    /// `γ‖x^k − prox_{γ⁻¹λg}(x^k − γ⁻¹∇ψ(x^k))‖_∞ < practical_tol`, `γ = L/0.95`
    Practical,
    /// whichever fires first
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Pg,
    Newton,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            StepKind::Pg => "pg",
            StepKind::Newton => "newton",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Converged,
    MaxIters,
    Aborted,
}

impl fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            SolveStatus::Converged => "converged",
            SolveStatus::MaxIters => "max_iters",
            SolveStatus::Aborted => "aborted",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub solver_kind: SolverKind,
    pub pg: PgParams,
    pub newton: NewtonParams,
    /// Tolerance of the `μ̄‖x − x̄‖_∞` test.
    pub epsilon: f64,
    /// Threshold of the practical residual test.
    pub practical_tol: f64,
    pub max_iters: usize,
    pub stopping_mode: StoppingMode,
    /// Seeds the power iteration behind the Lipschitz estimate.
    pub seed: u64,
    /// When false, every elapsed-time field is written as zero so that traces
    /// are reproducible byte for byte.
    pub record_time: bool,
}

impl SolverConfig {
    pub fn hybrid() -> Self {
        Self {
            solver_kind: SolverKind::Hpgsrn,
            pg: PgParams::hybrid(),
            newton: NewtonParams::default(),
            epsilon: 0.0,
            practical_tol: 1e-3,
            max_iters: 50_000,
            stopping_mode: StoppingMode::Practical,
            seed: 0,
            record_time: true,
        }
    }

    pub fn baseline() -> Self {
        Self {
            solver_kind: SolverKind::Pgls,
            pg: PgParams::baseline(),
            ..Self::hybrid()
        }
    }

    pub fn for_kind(kind: SolverKind) -> Self {
        match kind {
            SolverKind::Hpgsrn => Self::hybrid(),
            SolverKind::Pgls => Self::baseline(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.pg.validate()?;
        self.newton.validate()?;
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter(
                "max_iters must be at least 1".into(),
            ));
        }
        if !(self.epsilon >= 0.0) || !(self.practical_tol >= 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be nonnegative".into(),
            ));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self::hybrid()
    }
}

/// Telemetry for the transition `x^k → x^{k+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub k: usize,
    pub step: StepKind,
    /// `F(x^{k+1})`.
    #[serde(rename = "F")]
    pub f: f64,
    /// Stopping residual evaluated at `x^k`.
    pub residual: f64,
    /// `|supp(x^{k+1})|`.
    pub support: usize,
    pub mu_bar: f64,
    pub zeta: Option<f64>,
    pub alpha: Option<f64>,
    pub backtracks: usize,
    pub cosine: Option<f64>,
    /// `⟨∇F_S(u^k), d^k⟩` of an accepted Newton step.
    pub slope: Option<f64>,
    pub elapsed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub x_final: Vec<f64>,
    pub f_final: f64,
    pub f_initial: f64,
    pub iterations: usize,
    pub newton_iterations: usize,
    pub status: SolveStatus,
    pub error: Option<Error>,
    pub trace: Vec<TraceRecord>,
    pub time_seconds: f64,
}

impl SolveResult {
    pub fn nnz(&self) -> usize {
        self.x_final.iter().filter(|v| **v != 0.0).count()
    }

    /// Iteration count in `M(N)` form: total iterations and Newton steps.
    pub fn iteration_label(&self) -> String {
        format!("{}({})", self.iterations, self.newton_iterations)
    }
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

fn min_nonzero_magnitude(x: &[f64]) -> Option<f64> {
    x.iter()
        .filter(|v| **v != 0.0)
        .map(|v| v.abs())
        .min_by(f64::total_cmp)
}

/// The switch test: `sign(x) = sign(x̄)` elementwise and
/// `μ̄ + λq(q−1)|x|_min^{q−2} ≥ ½(μ̄ + λq(q−1)|x̄|_min^{q−2})`.
pub fn check_switch(x: &[f64], x_bar: &[f64], mu_bar: f64, lam: f64, q: f64) -> bool {
    if x.len() != x_bar.len() || x.iter().zip(x_bar).any(|(a, b)| sign(*a) != sign(*b)) {
        return false;
    }
    let (Some(xm), Some(xbm)) = (min_nonzero_magnitude(x), min_nonzero_magnitude(x_bar)) else {
        return false;
    };
    let c = lam * q * (q - 1.0);
    let omega_bar = mu_bar + c * xbm.powf(q - 2.0);
    mu_bar + c * xm.powf(q - 2.0) >= 0.5 * omega_bar
}

/// `μ̄‖x − x̄‖_∞`.
pub fn residual_s2(x: &[f64], x_bar: &[f64], mu_bar: f64) -> f64 {
    mu_bar
        * x.iter()
            .zip(x_bar)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
}

/// `γ‖x − prox_{γ⁻¹λg}(x − γ⁻¹∇ψ(x))‖_∞`.
pub fn residual_practical(x: &[f64], problem: &Problem, gamma: f64) -> Result<f64> {
    let grad = full_psi_gradient(x, problem)?;
    practical_from_gradient(x, &grad, problem, gamma)
}

fn practical_from_gradient(x: &[f64], grad: &[f64], problem: &Problem, gamma: f64) -> Result<f64> {
    let params = ProxParams::new(gamma, problem.lam(), problem.q())?;
    let shifted: Vec<f64> = x.iter().zip(grad).map(|(xi, gi)| xi - gi / gamma).collect();
    let p = vector_prox(&shifted, &params);
    Ok(gamma
        * x.iter()
            .zip(&p)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs())))
}

/// `γ = L/0.95` for the practical stopping test.
pub fn practical_gamma(problem: &Problem, seed: u64) -> Result<f64> {
    Ok(lipschitz_estimate(problem.loss(), problem.matrix(), seed)? / LIPSCHITZ_MARGIN)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    /// `(γ, residual_practical(x, γ))` for each grid point.
    pub residuals: Vec<(f64, f64)>,
    pub min_residual: f64,
    /// `‖∇F_{supp(x)}(x_{supp(x)})‖`; `None` when `x = 0`.
    pub subspace_gradient_norm: Option<f64>,
}

pub fn stationarity_report(
    x: &[f64],
    problem: &Problem,
    gamma_grid: &[f64],
) -> Result<StationarityReport> {
    let grad = full_psi_gradient(x, problem)?;
    let residuals = gamma_grid
        .iter()
        .map(|&g| Ok((g, practical_from_gradient(x, &grad, problem, g)?)))
        .collect::<Result<Vec<_>>>()?;
    let min_residual = residuals.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    let subspace_gradient_norm = if x.iter().all(|v| *v == 0.0) {
        None
    } else {
        let view = SubspaceView::at(x, problem)?;
        Some(norm2(&view.gradient(problem)?))
    };
    Ok(StationarityReport {
        residuals,
        min_residual,
        subspace_gradient_norm,
    })
}

/// Solves from `x⁰ = 0`.
pub fn solve(problem: &Problem, config: &SolverConfig) -> Result<SolveResult> {
    solve_from(problem, config, &vec![0.0; problem.features()])
}

/// Solves from a given starting point. Errors returned here are
/// configuration problems; failures during the iteration end the run with
/// [`SolveStatus::Aborted`] and the error attached.
pub fn solve_from(problem: &Problem, config: &SolverConfig, x0: &[f64]) -> Result<SolveResult> {
    solve_observed(problem, config, x0, |_| {})
}

/// State handed to the observer of [`solve_observed`] after each accepted
/// iteration.
#[derive(Debug, Clone, Copy)]
pub struct IterateState<'a> {
    pub k: usize,
    /// `x^k`.
    pub x: &'a [f64],
    /// `F(x^k)`.
    pub f_x: f64,
    /// Proximal-gradient candidate `x̄^k`.
    pub x_bar: &'a [f64],
    pub mu_bar: f64,
    pub step: StepKind,
    /// `x^{k+1}`.
    pub x_next: &'a [f64],
    /// `F(x^{k+1})`.
    pub f_next: f64,
}

/// [`solve_from`] with a callback invoked once per accepted iteration.
pub fn solve_observed<O>(
    problem: &Problem,
    config: &SolverConfig,
    x0: &[f64],
    mut observer: O,
) -> Result<SolveResult>
where
    O: FnMut(&IterateState<'_>),
{
    config.validate()?;
    if x0.len() != problem.features() {
        return Err(Error::DimensionMismatch {
            expected: problem.features(),
            got: x0.len(),
        });
    }
    let gamma = match config.stopping_mode {
        StoppingMode::S2 => None,
        _ => Some(practical_gamma(problem, config.seed)?),
    };
    let clock = Instant::now();
    let elapsed = || {
        if config.record_time {
            clock.elapsed().as_secs_f64()
        } else {
            0.0
        }
    };

    let mut x = x0.to_vec();
    let mut f_x = full_objective(&x, problem)?;
    if !f_x.is_finite() {
        return Err(Error::NonFinite("objective at the starting point"));
    }
    let f_initial = f_x;
    let mut grad = full_psi_gradient(&x, problem)?;
    let mut previous: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut trace = Vec::new();
    let mut newton_iterations = 0;
    let mut status = SolveStatus::MaxIters;
    let mut error = None;

    for k in 0..config.max_iters {
        let mu_k = match &previous {
            Some((x_prev, g_prev)) => bb_stepsize(x_prev, &x, g_prev, &grad, &config.pg),
            None => config.pg.initial_mu(),
        };
        let pg = match pg_step_with(&x, f_x, &grad, mu_k, problem, &config.pg) {
            Ok(pg) => pg,
            Err(e) => {
                status = SolveStatus::Aborted;
                error = Some(e);
                break;
            }
        };

        let s2 = residual_s2(&x, &pg.x_bar, pg.mu_bar);
        let practical = match gamma {
            Some(g) => match practical_from_gradient(&x, &grad, problem, g) {
                Ok(r) => Some(r),
                Err(e) => {
                    status = SolveStatus::Aborted;
                    error = Some(e);
                    break;
                }
            },
            None => None,
        };
        let stop = match config.stopping_mode {
            StoppingMode::S2 => s2 <= config.epsilon,
            StoppingMode::Practical => practical.is_some_and(|r| r < config.practical_tol),
            StoppingMode::Both => {
                s2 <= config.epsilon || practical.is_some_and(|r| r < config.practical_tol)
            }
        };
        let all_zero = x.iter().all(|v| *v == 0.0) && pg.x_bar.iter().all(|v| *v == 0.0);
        if stop || all_zero {
            status = SolveStatus::Converged;
            break;
        }
        let residual = practical.unwrap_or(s2);

        let switch = config.solver_kind == SolverKind::Hpgsrn
            && check_switch(&x, &pg.x_bar, pg.mu_bar, problem.lam(), problem.q());

        let mut record = TraceRecord {
            k,
            step: StepKind::Pg,
            f: pg.f_bar,
            residual,
            support: 0,
            mu_bar: pg.mu_bar,
            zeta: None,
            alpha: None,
            backtracks: pg.backtracks,
            cosine: None,
            slope: None,
            elapsed: 0.0,
        };
        let mut next = None;
        if switch {
            debug_assert_eq!(SupportSet::of(&x), SupportSet::of(&pg.x_bar));
            match newton_step(&x, problem, &config.newton) {
                Ok(Some(step)) => {
                    record.step = StepKind::Newton;
                    record.zeta = Some(step.zeta);
                    record.alpha = Some(step.alpha);
                    record.cosine = Some(step.cosine);
                    record.slope = Some(step.slope);
                    record.f = step.f_next;
                    newton_iterations += 1;
                    next = Some(step.x_next);
                }
                Ok(None) => {}
                Err(e) => {
                    status = SolveStatus::Aborted;
                    error = Some(e);
                    break;
                }
            }
        }
        let x_next = next.unwrap_or_else(|| pg.x_bar.clone());
        if !record.f.is_finite() {
            status = SolveStatus::Aborted;
            error = Some(Error::NonFinite("objective"));
            break;
        }
        let grad_next = match full_psi_gradient(&x_next, problem) {
            Ok(g) => g,
            Err(e) => {
                status = SolveStatus::Aborted;
                error = Some(e);
                break;
            }
        };
        record.support = x_next.iter().filter(|v| **v != 0.0).count();
        record.elapsed = elapsed();
        observer(&IterateState {
            k,
            x: &x,
            f_x,
            x_bar: &pg.x_bar,
            mu_bar: pg.mu_bar,
            step: record.step,
            x_next: &x_next,
            f_next: record.f,
        });
        f_x = record.f;
        trace.push(record);
        previous = Some((
            std::mem::replace(&mut x, x_next),
            std::mem::replace(&mut grad, grad_next),
        ));
    }

    Ok(SolveResult {
        f_final: f_x,
        f_initial,
        iterations: trace.len(),
        newton_iterations,
        status,
        error,
        trace,
        time_seconds: elapsed(),
        x_final: x,
    })
}

struct NewtonOutcome {
    x_next: Vec<f64>,
    f_next: f64,
    zeta: f64,
    alpha: f64,
    cosine: f64,
    slope: f64,
}

/// Newton step on `supp(x)`. `Ok(None)` asks the caller to fall back to the
/// proximal-gradient candidate (vanishing subspace gradient or an exhausted
/// Armijo search).
fn newton_step(x: &[f64], problem: &Problem, p: &NewtonParams) -> Result<Option<NewtonOutcome>> {
    let view = SubspaceView::at(x, problem)?;
    let dir = match newton_direction(&view, problem, p) {
        Ok(d) => d,
        Err(Error::ZeroGradient) => return Ok(None),
        Err(e) => return Err(e),
    };
    let step = match armijo_search(&view, &dir.direction, &dir.gradient, problem, p) {
        Ok(s) => s,
        Err(Error::ArmijoExhausted(_)) => {
            log::debug!("Armijo search exhausted; taking the proximal-gradient candidate");
            return Ok(None);
        }
        Err(e) => return Err(e),
    };
    let x_next = view.support().scatter(&step.u_next, x.len());
    let f_next = full_objective(&x_next, problem)?;
    Ok(Some(NewtonOutcome {
        x_next,
        f_next,
        zeta: dir.zeta,
        alpha: step.alpha,
        cosine: dir.cosine(),
        slope: dir.slope(),
    }))
}

/// Largest-magnitude change between consecutive iterates; handy in tests.
pub fn step_length(a: &[f64], b: &[f64]) -> f64 {
    norm_inf(&a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>())
}
