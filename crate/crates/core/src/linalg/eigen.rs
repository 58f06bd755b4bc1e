//! Extremal eigenvalue estimation.
//!
//! The largest eigenvalue of `AAᵀ` comes from power iteration. The smallest
//! eigenvalue of a symmetric matrix comes from Householder tridiagonalization
//! followed by Sturm-sequence bisection (dense path), or from Lanczos with full
//! reorthogonalization and explicit restarts (operator path).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::{dot, norm2, DenseSymmetricMatrix, SymmetricOperator};
use super::sparse::SparseColumnMatrix;
use crate::error::{Error, Result};

/// Orders up to this use the dense eigenvalue path.
pub const DENSE_CUTOFF: usize = 500;

/// Maximum Lanczos basis size before an explicit restart.
pub const LANCZOS_MAX_BASIS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub dense_cutoff: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iters: 10_000,
            dense_cutoff: DENSE_CUTOFF,
            seed: 0,
        }
    }
}

fn random_unit(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let nv = norm2(&v);
        if nv > 0.0 {
            return v.into_iter().map(|x| x / nv).collect();
        }
    }
}

/// `λ_max(AAᵀ) = ‖A‖₂²` by power iteration on `v ↦ A(Aᵀv)`.
///
/// Stops once `‖Bv − θv‖ ≤ tol·θ` for the Rayleigh quotient `θ`. On
/// [`Error::NoConvergence`] the error carries the last estimate.
pub fn spectral_norm_sq(
    a: &SparseColumnMatrix,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if a.rows() == 0 || a.cols() == 0 || a.is_zero() {
        return Err(Error::ZeroMatrix);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random_unit(a.rows(), &mut rng);
    let mut theta = 0.0;
    for _ in 0..max_iters {
        let w = a.mul_vec(&a.tr_mul_vec(&v)?)?;
        theta = dot(&v, &w);
        let resid = w
            .iter()
            .zip(&v)
            .map(|(wi, vi)| (wi - theta * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        if theta > 0.0 && resid <= tol * theta {
            return Ok(theta);
        }
        let nw = norm2(&w);
        if nw == 0.0 {
            // start vector fell in the null space of Aᵀ
            v = random_unit(a.rows(), &mut rng);
            continue;
        }
        v = w.into_iter().map(|x| x / nw).collect();
    }
    Err(Error::NoConvergence {
        estimate: theta,
        iterations: max_iters,
    })
}

/// Reduces a symmetric matrix to tridiagonal form `(diagonal, off_diagonal)`
/// with Householder reflections. Eigenvalues are preserved.
pub fn tridiagonalize(h: &DenseSymmetricMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = h.order();
    let mut a = h.as_slice().to_vec();
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n.saturating_sub(1)];
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut v: Vec<f64> = (0..m).map(|i| a[(k + 1 + i) * n + k]).collect();
        let xnorm = norm2(&v);
        if xnorm == 0.0 {
            diag[k] = a[k * n + k];
            off[k] = 0.0;
            continue;
        }
        let alpha = if v[0] > 0.0 { -xnorm } else { xnorm };
        v[0] -= alpha;
        let vnorm = norm2(&v);
        diag[k] = a[k * n + k];
        off[k] = alpha;
        if vnorm == 0.0 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= vnorm;
        }
        // trailing block B ← H B H with H = I − 2vvᵀ
        let p: Vec<f64> = (0..m)
            .map(|i| {
                let row = (k + 1 + i) * n + k + 1;
                dot(&a[row..row + m], &v)
            })
            .collect();
        let kk = dot(&v, &p);
        let q: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kk * vi).collect();
        for i in 0..m {
            let row = (k + 1 + i) * n + k + 1;
            for j in 0..m {
                a[row + j] -= 2.0 * (v[i] * q[j] + q[i] * v[j]);
            }
        }
    }
    if n >= 2 {
        diag[n - 2] = a[(n - 2) * n + n - 2];
        off[n - 2] = a[(n - 1) * n + n - 2];
    }
    if n >= 1 {
        diag[n - 1] = a[(n - 1) * n + n - 1];
    }
    (diag, off)
}

/// Number of eigenvalues of the tridiagonal matrix strictly below `x`.
fn sturm_count(diag: &[f64], off: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..diag.len() {
        let e2 = if i == 0 { 0.0 } else { off[i - 1] * off[i - 1] };
        q = diag[i] - x - if i == 0 { 0.0 } else { e2 / q };
        if q == 0.0 {
            q = -f64::EPSILON * (diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Smallest eigenvalue of a symmetric tridiagonal matrix by bisection,
/// resolved to machine precision.
pub fn tridiagonal_smallest(diag: &[f64], off: &[f64]) -> f64 {
    let n = diag.len();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r =
            if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let pad = f64::EPSILON * (lo.abs().max(hi.abs())).max(1.0);
    lo -= pad;
    hi += pad;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(diag, off, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Dense path: full tridiagonal reduction plus bisection.
pub fn smallest_eigenvalue_dense(h: &DenseSymmetricMatrix) -> Result<f64> {
    if h.order() == 0 {
        return Err(Error::InvalidParameter(
            "matrix order must be at least 1".into(),
        ));
    }
    if h.as_slice().iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("symmetric matrix entry"));
    }
    let (d, e) = tridiagonalize(h);
    Ok(tridiagonal_smallest(&d, &e))
}

/// Eigenvector of a small tridiagonal matrix for eigenvalue `theta`, by two
/// rounds of inverse iteration with a dense pivoted solve.
fn tridiagonal_eigenvector(
    diag: &[f64],
    off: &[f64],
    theta: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<f64> {
    let n = diag.len();
    let scale = diag
        .iter()
        .map(|x| x.abs())
        .chain(off.iter().map(|x| x.abs()))
        .fold(1e-300, f64::max);
    let shift = theta - 1e-10 * scale;
    let mut y = random_unit(n, rng);
    for _ in 0..2 {
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            m[i * n + i] = diag[i] - shift;
            if i + 1 < n {
                m[i * n + i + 1] = off[i];
                m[(i + 1) * n + i] = off[i];
            }
        }
        y = gauss_solve(n, &mut m, y);
        let ny = norm2(&y);
        if !(ny > 0.0) || !ny.is_finite() {
            let mut e = vec![0.0; n];
            e[0] = 1.0;
            return e;
        }
        for v in y.iter_mut() {
            *v /= ny;
        }
    }
    y
}

fn gauss_solve(n: usize, m: &mut [f64], mut b: Vec<f64>) -> Vec<f64> {
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i * n + col].abs().total_cmp(&m[j * n + col].abs()))
            .unwrap();
        if piv != col {
            for j in 0..n {
                m.swap(piv * n + j, col * n + j);
            }
            b.swap(piv, col);
        }
        let p = if m[col * n + col] == 0.0 {
            1e-300
        } else {
            m[col * n + col]
        };
        m[col * n + col] = p;
        for i in (col + 1)..n {
            let f = m[i * n + col] / p;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[i * n + j] -= f * m[col * n + j];
            }
            b[i] -= f * b[col];
        }
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= m[i * n + j] * b[j];
        }
        b[i] = s / m[i * n + i];
    }
    b
}

/// Operator path: restarted Lanczos with full reorthogonalization.
///
/// Converged when the Ritz residual `|β_k y_k| ≤ tol·max(1, ‖H‖)`. If the
/// matvec budget runs out, the error carries `θ − residual`, which errs on the
/// low side so that a caller using it as a shift over-regularizes.
pub fn smallest_eigenvalue_lanczos<O: SymmetricOperator + ?Sized>(
    op: &O,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<f64> {
    let n = op.order();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "operator order must be at least 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis_cap = n.min(LANCZOS_MAX_BASIS);
    let mut start = random_unit(n, &mut rng);
    let mut matvecs = 0usize;
    let mut w = vec![0.0; n];
    loop {
        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(basis_cap);
        let mut beta = Vec::with_capacity(basis_cap);
        let mut beta_last = 0.0;
        let mut scale: f64 = 0.0;
        for j in 0..basis_cap {
            op.apply(&basis[j], &mut w);
            matvecs += 1;
            let a = dot(&basis[j], &w);
            if !a.is_finite() {
                return Err(Error::NonFinite("Lanczos coefficient"));
            }
            for (wi, qi) in w.iter_mut().zip(&basis[j]) {
                *wi -= a * qi;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wi, qi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= b * qi;
                }
            }
            for _ in 0..2 {
                for q in &basis {
                    let c = dot(q, &w);
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= c * qi;
                    }
                }
            }
            alpha.push(a);
            scale = scale.max(a.abs());
            let b = norm2(&w);
            if j + 1 == basis_cap {
                beta_last = b;
                break;
            }
            if b <= 1e-12 * scale.max(1e-300) {
                // invariant subspace: continue from a fresh orthogonal direction
                let mut fresh = random_unit(n, &mut rng);
                for _ in 0..2 {
                    for q in &basis {
                        let c = dot(q, &fresh);
                        for (fi, qi) in fresh.iter_mut().zip(q) {
                            *fi -= c * qi;
                        }
                    }
                }
                let nf = norm2(&fresh);
                if nf <= 1e-10 {
                    beta_last = 0.0;
                    break;
                }
                beta.push(0.0);
                basis.push(fresh.into_iter().map(|x| x / nf).collect());
            } else {
                scale = scale.max(b);
                beta.push(b);
                basis.push(w.iter().map(|x| x / b).collect());
            }
        }
        let theta = tridiagonal_smallest(&alpha, &beta);
        let y = tridiagonal_eigenvector(&alpha, &beta, theta, &mut rng);
        let resid = (beta_last * y[y.len() - 1]).abs();
        let norm_est = alpha
            .iter()
            .enumerate()
            .map(|(i, a)| {
                a.abs()
                    + if i > 0 { beta[i - 1].abs() } else { 0.0 }
                    + if i < beta.len() { beta[i].abs() } else { 0.0 }
            })
            .fold(1.0, f64::max);
        if resid <= tol * norm_est {
            return Ok(theta);
        }
        if matvecs >= max_iters {
            return Err(Error::NoConvergence {
                estimate: theta - resid,
                iterations: matvecs,
            });
        }
        let mut ritz = vec![0.0; n];
        for (q, &yi) in basis.iter().zip(&y) {
            for (ri, qi) in ritz.iter_mut().zip(q) {
                *ri += yi * qi;
            }
        }
        let nr = norm2(&ritz);
        start = if nr > 0.0 {
            ritz.into_iter().map(|x| x / nr).collect()
        } else {
            random_unit(n, &mut rng)
        };
    }
}

/// `λ_min(H)`: dense path when `order ≤ dense_cutoff`, Lanczos otherwise.
pub fn smallest_eigenvalue(h: &DenseSymmetricMatrix, opts: &EigenOptions) -> Result<f64> {
    if h.order() <= opts.dense_cutoff {
        smallest_eigenvalue_dense(h)
    } else {
        smallest_eigenvalue_lanczos(h, opts.tol, opts.max_iters, opts.seed)
    }
}

/// `λ_min` of an operator. Small operators are materialized column by column
/// and sent down the dense path.
pub fn smallest_eigenvalue_operator<O: SymmetricOperator + ?Sized>(
    op: &O,
    opts: &EigenOptions,
) -> Result<f64> {
    let n = op.order();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "operator order must be at least 1".into(),
        ));
    }
    if n <= opts.dense_cutoff {
        let mut cols = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            op.apply(&e, &mut cols[j * n..(j + 1) * n]);
            e[j] = 0.0;
        }
        let mut m = DenseSymmetricMatrix::zeros(n);
        for j in 0..n {
            for i in j..n {
                m.set(i, j, 0.5 * (cols[j * n + i] + cols[i * n + j]));
            }
        }
        smallest_eigenvalue_dense(&m)
    } else {
        smallest_eigenvalue_lanczos(op, opts.tol, opts.max_iters, opts.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_identity_and_diagonal() {
        let i3 = SparseColumnMatrix::identity(3);
        assert!((spectral_norm_sq(&i3, 1e-10, 1000, 1).unwrap() - 1.0).abs() < 1e-9);
        let d = SparseColumnMatrix::diagonal(&[3.0, 1.0]);
        assert!((spectral_norm_sq(&d, 1e-10, 1000, 1).unwrap() - 9.0).abs() < 1e-8);
    }

    #[test]
    fn spectral_zero_matrix() {
        let z = SparseColumnMatrix::from_dense(2, 2, &[0.0; 4]).unwrap();
        assert_eq!(spectral_norm_sq(&z, 1e-6, 10, 0), Err(Error::ZeroMatrix));
    }

    #[test]
    fn spectral_no_convergence_carries_estimate() {
        let d = SparseColumnMatrix::diagonal(&[1.0, 0.999_999]);
        match spectral_norm_sq(&d, 1e-15, 3, 7) {
            Err(Error::NoConvergence {
                estimate,
                iterations,
            }) => {
                assert_eq!(iterations, 3);
                assert!(estimate > 0.99 && estimate <= 1.0 + 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn smallest_of_identity_and_diagonal() {
        let opts = EigenOptions::default();
        let i2 = DenseSymmetricMatrix::identity(2);
        assert!((smallest_eigenvalue(&i2, &opts).unwrap() - 1.0).abs() < 1e-14);
        let d = DenseSymmetricMatrix::from_diagonal(&[-2.0, 5.0]);
        assert!((smallest_eigenvalue(&d, &opts).unwrap() + 2.0).abs() < 1e-14);
        let one = DenseSymmetricMatrix::from_diagonal(&[4.5]);
        assert!((smallest_eigenvalue(&one, &opts).unwrap() - 4.5).abs() < 1e-14);
    }

    #[test]
    fn lanczos_diagonal() {
        let d = DenseSymmetricMatrix::from_diagonal(&[3.0, -2.0, 5.0, 0.5]);
        let v = smallest_eigenvalue_lanczos(&d, 1e-10, 1000, 3).unwrap();
        assert!((v + 2.0).abs() < 1e-9);
    }

    #[test]
    fn operator_materialization_matches_dense() {
        let mut h = DenseSymmetricMatrix::zeros(3);
        h.set(0, 0, 2.0);
        h.set(1, 0, -1.0);
        h.set(1, 1, 2.0);
        h.set(2, 1, -1.0);
        h.set(2, 2, 2.0);
        let dense = smallest_eigenvalue_dense(&h).unwrap();
        let op = smallest_eigenvalue_operator(&h, &EigenOptions::default()).unwrap();
        assert!((dense - op).abs() < 1e-14);
        assert!((dense - (2.0 - 2f64.sqrt())).abs() < 1e-13);
    }
}
