//! Dense and sparse kernels: SPD solves, extremal eigenvalues, spectral norms.

mod cg;
mod dense;
mod eigen;
mod sparse;

pub use cg::{solve_spd_cg, CgSolution, DEFAULT_CG_REL_TOL};
pub use dense::{
    dot, norm2, norm_inf, solve_spd_direct, Cholesky, DenseSymmetricMatrix, FnOperator,
    SymmetricOperator,
};
pub use eigen::{
    smallest_eigenvalue, smallest_eigenvalue_dense, smallest_eigenvalue_lanczos,
    smallest_eigenvalue_operator, spectral_norm_sq, tridiagonal_smallest, tridiagonalize,
    EigenOptions, DENSE_CUTOFF, LANCZOS_MAX_BASIS,
};
pub use sparse::SparseColumnMatrix;
