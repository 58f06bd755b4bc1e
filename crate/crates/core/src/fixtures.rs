//! Reference problems: a one-dimensional piecewise instance with a known
//! limit point, and seeded synthetic sparse regression.

use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::driver::{SolverConfig, StoppingMode};
use crate::error::{Error, Result};
use crate::io::{lambda_from_scaling, Dataset};
use crate::linalg::SparseColumnMatrix;
use crate::loss::{LossKind, LossModel, SeparableLoss};
use crate::newton::NewtonParams;
use crate::pg::PgParams;
use crate::problem::Problem;

/// Scalar loss with breakpoints at 1 and 4:
///
/// ```text
/// f(t) = 49/8 t² − 67/4 t + 85/8        t < 1
///        (t − 2)⁴ − t^{1/2}             1 ≤ t < 4
///        1537/64 t² − 5132/32 t + 1085/4  t ≥ 4
/// ```
#[derive(Debug, Clone, Copy, Default)]
pub struct PiecewiseLoss1D;

impl PiecewiseLoss1D {
    pub fn eval(t: f64) -> f64 {
        if t < 1.0 {
            49.0 / 8.0 * t * t - 67.0 / 4.0 * t + 85.0 / 8.0
        } else if t < 4.0 {
            (t - 2.0).powi(4) - t.powf(0.5)
        } else {
            1537.0 / 64.0 * t * t - 5132.0 / 32.0 * t + 1085.0 / 4.0
        }
    }

    pub fn derivative(t: f64) -> f64 {
        if t < 1.0 {
            49.0 / 4.0 * t - 67.0 / 4.0
        } else if t < 4.0 {
            4.0 * (t - 2.0).powi(3) - 0.5 / t.sqrt()
        } else {
            1537.0 / 32.0 * t - 5132.0 / 32.0
        }
    }

    pub fn second_derivative(t: f64) -> f64 {
        if t < 1.0 {
            49.0 / 4.0
        } else if t < 4.0 {
            12.0 * (t - 2.0).powi(2) + 0.25 * t.powf(-1.5)
        } else {
            1537.0 / 32.0
        }
    }
}

impl SeparableLoss for PiecewiseLoss1D {
    fn dim(&self) -> usize {
        1
    }

    fn value(&self, z: &[f64]) -> f64 {
        Self::eval(z[0])
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        vec![Self::derivative(z[0])]
    }

    fn hessian_diagonal(&self, z: &[f64]) -> Vec<f64> {
        vec![Self::second_derivative(z[0])]
    }

    /// `(t − 2)⁴ ≥ 0` and `t^{1/2} < 2` on the middle branch; the outer
    /// branches stay above 0.
    fn lower_bound(&self) -> f64 {
        -2.0
    }

    fn curvature_bound(&self) -> Option<f64> {
        Some(49.0)
    }
}

/// The one-dimensional instance `min_t f(t) + |t|^{1/2}` with its solver
/// settings and starting point `t⁰ = 2.1`.
pub struct Example1D {
    pub problem: Problem,
    pub config: SolverConfig,
    pub t0: f64,
}

pub fn example51_problem() -> Example1D {
    let problem = Problem::new(
        SparseColumnMatrix::identity(1),
        LossModel::custom(Arc::new(PiecewiseLoss1D)),
        1.0,
        0.5,
    )
    .expect("fixed instance is valid");
    let config = SolverConfig {
        pg: PgParams {
            tau_tilde: 2.0,
            alpha_tilde: 1.0,
            mu_min: 40.0,
            ..PgParams::hybrid()
        },
        newton: NewtonParams {
            sigma: 1.0 / 3.0,
            b2: 1.0,
            varrho: 1e-4,
            beta: 0.5,
            ..NewtonParams::default()
        },
        stopping_mode: StoppingMode::S2,
        epsilon: 1e-12,
        max_iters: 100_000,
        ..SolverConfig::hybrid()
    };
    Example1D {
        problem,
        config,
        t0: 2.1,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub m: usize,
    pub n: usize,
    /// Nonzeros in the planted solution.
    pub k: usize,
    /// Standard deviation of the additive Gaussian noise.
    pub noise: f64,
    pub seed: u64,
    pub loss: LossKind,
    pub lambda_c: f64,
    pub q: f64,
}

impl SyntheticSpec {
    pub fn least_squares(m: usize, n: usize, k: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            k,
            noise: 1e-2,
            seed,
            loss: LossKind::LeastSquares,
            lambda_c: 1e-2,
            q: 0.5,
        }
    }

    pub fn logistic(m: usize, n: usize, k: usize, seed: u64) -> Self {
        Self {
            loss: LossKind::Logistic,
            ..Self::least_squares(m, n, k, seed)
        }
    }
}

/// Gaussian design with unit-norm columns, a planted `k`-sparse vector with
/// magnitudes in `[0.5, 2]`, and targets `Ax + noise` (least squares) or
/// `sign(Ax + noise)` (logistic).
pub fn generate_dataset(spec: &SyntheticSpec) -> Result<(Dataset, Vec<f64>)> {
    if spec.m == 0 || spec.n == 0 || spec.k > spec.n {
        return Err(Error::InvalidParameter("need m, n >= 1 and k <= n".into()));
    }
    if !(spec.noise >= 0.0) {
        return Err(Error::InvalidParameter("noise must be nonnegative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut dense = vec![0.0; spec.m * spec.n];
    for j in 0..spec.n {
        let mut col: Vec<f64> = (0..spec.m).map(|_| rng.sample(StandardNormal)).collect();
        let norm = col.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (i, v) in col.iter_mut().enumerate() {
            *v /= norm;
            dense[i * spec.n + j] = *v;
        }
    }
    let a = SparseColumnMatrix::from_dense(spec.m, spec.n, &dense)?;
    let mut x_true = vec![0.0; spec.n];
    let mut support = sample(&mut rng, spec.n, spec.k).into_vec();
    support.sort_unstable();
    for j in support {
        let magnitude = rng.random_range(0.5..=2.0);
        x_true[j] = if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        };
    }
    let clean = a.mul_vec(&x_true)?;
    let b: Vec<f64> = clean
        .iter()
        .map(|v| {
            let noisy = v + spec.noise * rng.sample::<f64, _>(StandardNormal);
            match spec.loss {
                LossKind::LeastSquares => noisy,
                LossKind::Logistic => {
                    if noisy >= 0.0 {
                        1.0
                    } else {
                        -1.0
                    }
                }
            }
        })
        .collect();
    let dataset = Dataset {
        a,
        b,
        name: format!("synthetic-{}x{}-k{}-s{}", spec.m, spec.n, spec.k, spec.seed),
    };
    Ok((dataset, x_true))
}

/// [`generate_dataset`] wrapped into a problem with `λ` from the scaling rule.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(Problem, Vec<f64>)> {
    let (dataset, x_true) = generate_dataset(spec)?;
    let lam = lambda_from_scaling(&dataset, spec.loss, spec.lambda_c)?;
    let loss = LossModel::new(spec.loss, dataset.b)?;
    Ok((Problem::new(dataset.a, loss, lam, spec.q)?, x_true))
}
