use super::dense::{dot, norm2, SymmetricOperator};
use super::sparse::check_len;
use crate::error::Result;

pub const DEFAULT_CG_REL_TOL: f64 = 1e-8;

/// Outcome of a conjugate-gradient solve. When `converged` is false,
/// `solution` is the best iterate reached within the budget.
#[derive(Debug, Clone, PartialEq)]
pub struct CgSolution {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
    pub converged: bool,
}

/// Solves `G d = rhs` for symmetric positive definite `G` given only as an
/// operator. Stops when `‖G d − rhs‖ ≤ rel_tol·‖rhs‖`; `max_iters = None`
/// means `10·order`.
pub fn solve_spd_cg<O: SymmetricOperator + ?Sized>(
    op: &O,
    rhs: &[f64],
    rel_tol: f64,
    max_iters: Option<usize>,
) -> Result<CgSolution> {
    let n = op.order();
    check_len(n, rhs.len())?;
    let max_iters = max_iters.unwrap_or(10 * n.max(1));
    let target = rel_tol * norm2(rhs);
    let mut x = vec![0.0; n];
    let mut r = rhs.to_vec();
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= target || rr == 0.0 {
        return Ok(CgSolution {
            solution: x,
            iterations: 0,
            residual_norm: rr.sqrt(),
            converged: true,
        });
    }
    let mut p = r.clone();
    let mut gp = vec![0.0; n];
    let mut best = (x.clone(), rr.sqrt());
    for it in 1..=max_iters {
        op.apply(&p, &mut gp);
        let pgp = dot(&p, &gp);
        if !(pgp > 0.0) || !pgp.is_finite() {
            // operator not positive definite along p
            break;
        }
        let step = rr / pgp;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * gp[i];
        }
        let rr_new = dot(&r, &r);
        let rn = rr_new.sqrt();
        if rn < best.1 {
            best = (x.clone(), rn);
        }
        if rn <= target {
            return Ok(CgSolution {
                solution: x,
                iterations: it,
                residual_norm: rn,
                converged: true,
            });
        }
        let ratio = rr_new / rr;
        for i in 0..n {
            p[i] = r[i] + ratio * p[i];
        }
        rr = rr_new;
    }
    Ok(CgSolution {
        solution: best.0,
        iterations: max_iters,
        residual_norm: best.1,
        converged: false,
    })
}
