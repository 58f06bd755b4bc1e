//! Objective evaluation in full space and on a fixed support.
//!
//! On `S = supp(x)` the restriction `F_S(u) = f(A_S u) + λ Σ |u_i|^q` is smooth
//! as long as no `u_i` vanishes, with
//!
//! ```text
//! ∇F_S(u)  = A_Sᵀ ∇f(A_S u) + λq sign(u) ∘ |u|^{q−1}
//! ∇²F_S(u) = A_Sᵀ ∇²f(A_S u) A_S + λq(q−1) Diag(|u|^{q−2})
//! ```

use crate::error::{Error, Result};
use crate::linalg::{DenseSymmetricMatrix, SparseColumnMatrix, SymmetricOperator};
use crate::problem::Problem;

/// Coordinates with magnitude below this are rejected on a support; `|u|^{q−2}`
/// would overflow.
pub const SUPPORT_FLOOR: f64 = 1e-150;

/// `F(x) = f(Ax) + λ‖x‖_q^q`.
pub fn full_objective(x: &[f64], problem: &Problem) -> Result<f64> {
    let z = problem.matrix().mul_vec(x)?;
    Ok(problem.loss().value(&z)? + problem.penalty(x))
}

/// `∇ψ(x) = Aᵀ∇f(Ax)`.
pub fn full_psi_gradient(x: &[f64], problem: &Problem) -> Result<Vec<f64>> {
    let z = problem.matrix().mul_vec(x)?;
    let g = problem.loss().gradient(&z)?;
    problem.matrix().tr_mul_vec(&g)
}

/// Sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SupportSet {
    indices: Vec<usize>,
}

impl SupportSet {
    pub fn new(indices: Vec<usize>, n: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "support indices must be strictly ascending".into(),
            ));
        }
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(Error::InvalidParameter(
                "support index out of bounds".into(),
            ));
        }
        Ok(Self { indices })
    }

    /// `supp(x)`.
    pub fn of(x: &[f64]) -> Self {
        Self {
            indices: x
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// `x_S`.
    pub fn gather(&self, x: &[f64]) -> Vec<f64> {
        self.indices.iter().map(|&i| x[i]).collect()
    }

    /// Embeds `u` into a length-`n` vector with zeros off the support.
    pub fn scatter(&self, u: &[f64], n: usize) -> Vec<f64> {
        let mut x = vec![0.0; n];
        for (&i, &v) in self.indices.iter().zip(u) {
            x[i] = v;
        }
        x
    }
}

/// `F_S` around a point `u = x_S` with all `u_i ≠ 0`, holding the gathered
/// columns `A_S`.
#[derive(Debug, Clone)]
pub struct SubspaceView {
    support: SupportSet,
    u: Vec<f64>,
    a_s: SparseColumnMatrix,
}

fn check_support_values(u: &[f64]) -> Result<()> {
    match u.iter().position(|v| !(v.abs() >= SUPPORT_FLOOR)) {
        Some(index) => Err(Error::ZeroOnSupport { index }),
        None => Ok(()),
    }
}

impl SubspaceView {
    /// View at `x` on `supp(x)`.
    pub fn at(x: &[f64], problem: &Problem) -> Result<Self> {
        let support = SupportSet::of(x);
        let u = support.gather(x);
        Self::new(support, u, problem)
    }

    pub fn new(support: SupportSet, u: Vec<f64>, problem: &Problem) -> Result<Self> {
        if support.len() != u.len() {
            return Err(Error::DimensionMismatch {
                expected: support.len(),
                got: u.len(),
            });
        }
        check_support_values(&u)?;
        let a_s = problem.matrix().select_columns(support.indices())?;
        Ok(Self { support, u, a_s })
    }

    pub fn support(&self) -> &SupportSet {
        &self.support
    }

    pub fn point(&self) -> &[f64] {
        &self.u
    }

    pub fn columns(&self) -> &SparseColumnMatrix {
        &self.a_s
    }

    pub fn dim(&self) -> usize {
        self.u.len()
    }

    /// `F_S(u)` at the view's point.
    pub fn value(&self, problem: &Problem) -> Result<f64> {
        self.value_at(&self.u, problem)
    }

    /// `F_S` at another point on the same support. Zeros are allowed here;
    /// they simply drop out of the penalty.
    pub fn value_at(&self, u: &[f64], problem: &Problem) -> Result<f64> {
        let z = self.a_s.mul_vec(u)?;
        Ok(problem.loss().value(&z)? + problem.penalty(u))
    }

    /// `∇F_S(u)`.
    pub fn gradient(&self, problem: &Problem) -> Result<Vec<f64>> {
        let z = self.a_s.mul_vec(&self.u)?;
        let gf = problem.loss().gradient(&z)?;
        let mut g = self.a_s.tr_mul_vec(&gf)?;
        let (lam, q) = (problem.lam(), problem.q());
        for (gi, &ui) in g.iter_mut().zip(&self.u) {
            *gi += lam * q * ui.signum() * ui.abs().powf(q - 1.0);
        }
        Ok(g)
    }

    /// `λq(q−1)|u|^{q−2}`, the (negative) diagonal contributed by the penalty.
    fn penalty_curvature(&self, problem: &Problem) -> Vec<f64> {
        let (lam, q) = (problem.lam(), problem.q());
        self.u
            .iter()
            .map(|ui| lam * q * (q - 1.0) * ui.abs().powf(q - 2.0))
            .collect()
    }

    /// `∇²F_S(u)` assembled densely.
    pub fn hessian_dense(&self, problem: &Problem) -> Result<DenseSymmetricMatrix> {
        let z = self.a_s.mul_vec(&self.u)?;
        let d = problem.loss().hessian_diagonal(&z)?;
        let k = self.dim();
        let mut h = DenseSymmetricMatrix::zeros(k);
        for (row, entries) in self.a_s.row_lists().iter().enumerate() {
            let dr = d[row];
            if dr == 0.0 {
                continue;
            }
            for (p, &(i, vi)) in entries.iter().enumerate() {
                for &(j, vj) in &entries[..=p] {
                    h.add_to(i, j, dr * vi * vj);
                }
            }
        }
        for (i, c) in self.penalty_curvature(problem).into_iter().enumerate() {
            h.add_to(i, i, c);
        }
        Ok(h)
    }

    /// `∇²F_S(u)` as an operator.
    pub fn hessian_operator(&self, problem: &Problem) -> Result<SubspaceHessian<'_>> {
        let z = self.a_s.mul_vec(&self.u)?;
        Ok(SubspaceHessian {
            a_s: &self.a_s,
            loss_curvature: problem.loss().hessian_diagonal(&z)?,
            penalty_curvature: self.penalty_curvature(problem),
        })
    }

    /// `∇²F_S(u) w` without assembling the matrix.
    pub fn hessian_apply(&self, problem: &Problem, w: &[f64]) -> Result<Vec<f64>> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: w.len(),
            });
        }
        let op = self.hessian_operator(problem)?;
        let mut out = vec![0.0; w.len()];
        op.apply(w, &mut out);
        Ok(out)
    }
}

/// `w ↦ A_Sᵀ(D ∘ (A_S w)) + c ∘ w` for fixed loss curvature `D` and penalty
/// curvature `c`.
#[derive(Debug, Clone)]
pub struct SubspaceHessian<'a> {
    a_s: &'a SparseColumnMatrix,
    loss_curvature: Vec<f64>,
    penalty_curvature: Vec<f64>,
}

impl SymmetricOperator for SubspaceHessian<'_> {
    fn order(&self) -> usize {
        self.penalty_curvature.len()
    }

    fn apply(&self, w: &[f64], out: &mut [f64]) {
        let mut aw = self.a_s.mul_vec(w).expect("length checked by caller");
        for (v, d) in aw.iter_mut().zip(&self.loss_curvature) {
            *v *= d;
        }
        let back = self.a_s.tr_mul_vec(&aw).expect("length checked by caller");
        for ((o, b), (c, wi)) in out
            .iter_mut()
            .zip(back)
            .zip(self.penalty_curvature.iter().zip(w))
        {
            *o = b + c * wi;
        }
    }
}

/// Diagonal of `D³g_S(u)(w) = q(q−1)(q−2) Diag(sign(u) ∘ |u|^{q−3} ∘ w)`.
/// Diagnostic only; the solver never needs third derivatives.
pub fn penalty_third_derivative(u: &[f64], w: &[f64], q: f64) -> Result<Vec<f64>> {
    if u.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: w.len(),
        });
    }
    check_support_values(u)?;
    Ok(u.iter()
        .zip(w)
        .map(|(ui, wi)| q * (q - 1.0) * (q - 2.0) * ui.signum() * ui.abs().powf(q - 3.0) * wi)
        .collect())
}
