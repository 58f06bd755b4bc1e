//! `ℓq`-regularized sparse regression, `0 < q < 1`:
//!
//! ```text
//! min_x  F(x) = f(Ax) + λ Σ_i |x_i|^q
//! ```
//!
//! Two solvers share one loop in [`driver`]: a hybrid that alternates
//! proximal-gradient steps with regularized Newton steps on the current
//! support, and a plain proximal-gradient baseline with backtracking.
//!
//! ```
//! use sparseq::fixtures::{generate_synthetic, SyntheticSpec};
//! use sparseq::{solve, SolveStatus, SolverConfig};
//!
//! let (problem, _) = generate_synthetic(&SyntheticSpec::least_squares(40, 80, 4, 1)).unwrap();
//! let result = solve(&problem, &SolverConfig::hybrid()).unwrap();
//! assert_eq!(result.status, SolveStatus::Converged);
//! ```

pub mod driver;
pub mod error;
pub mod fixtures;
pub mod io;
pub mod linalg;
pub mod loss;
pub mod newton;
pub mod pg;
pub mod problem;
pub mod prox;
pub mod subspace;

pub use driver::{
    check_switch, residual_practical, residual_s2, solve, solve_from, solve_observed,
    stationarity_report, IterateState, SolveResult, SolveStatus, SolverConfig, SolverKind,
    StepKind, StoppingMode, TraceRecord,
};
pub use error::{Error, Result};
pub use io::{lambda_from_scaling, parse_libsvm, write_trace, Dataset, TraceFormat};
pub use linalg::SparseColumnMatrix;
pub use loss::{LossKind, LossModel, SeparableLoss};
pub use newton::NewtonParams;
pub use pg::PgParams;
pub use problem::Problem;
pub use prox::{scalar_prox, vector_prox, ProxParams};
pub use subspace::{full_objective, SubspaceView, SupportSet};
