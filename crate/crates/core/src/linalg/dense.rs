use crate::error::{Error, Result};

use super::sparse::check_len;

/// A linear operator `v ↦ Hv` with `H` symmetric.
pub trait SymmetricOperator {
    fn order(&self) -> usize;
    fn apply(&self, v: &[f64], out: &mut [f64]);
}

/// Wraps a closure as a [`SymmetricOperator`].
pub struct FnOperator<F> {
    order: usize,
    f: F,
}

impl<F: Fn(&[f64], &mut [f64])> FnOperator<F> {
    pub fn new(order: usize, f: F) -> Self {
        Self { order, f }
    }
}

impl<F: Fn(&[f64], &mut [f64])> SymmetricOperator for FnOperator<F> {
    fn order(&self) -> usize {
        self.order
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        (self.f)(v, out)
    }
}

/// Dense symmetric matrix in full row-major storage. Every write goes to both
/// `(i, j)` and `(j, i)`, so symmetry holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSymmetricMatrix {
    order: usize,
    data: Vec<f64>,
}

impl DenseSymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            data: vec![0.0; order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        let mut m = Self::zeros(order);
        for i in 0..order {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, d);
        }
        m
    }

    /// Builds from the lower triangle of a row-major `order × order` array; the
    /// upper triangle of the input is ignored.
    pub fn from_lower(order: usize, data: &[f64]) -> Result<Self> {
        check_len(order * order, data.len())?;
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                m.set(i, j, data[i * order + j]);
            }
        }
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.order + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.order + j] = v;
        self.data[j * self.order + i] = v;
    }

    pub fn add_to(&mut self, i: usize, j: usize, v: f64) {
        let cur = self.get(i, j);
        self.set(i, j, cur + v);
    }

    pub fn add_diagonal(&mut self, shift: f64) {
        for i in 0..self.order {
            self.data[i * self.order + i] += shift;
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.order..(i + 1) * self.order]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.order).map(|i| dot(self.row(i), v)).collect()
    }

    /// Max absolute row sum; an upper bound on the spectral norm.
    pub fn inf_norm(&self) -> f64 {
        (0..self.order)
            .map(|i| self.row(i).iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

impl SymmetricOperator for DenseSymmetricMatrix {
    fn order(&self) -> usize {
        self.order
    }

    fn apply(&self, v: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), v);
        }
    }
}

/// Lower Cholesky factor `L` with `G = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    order: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn factor(g: &DenseSymmetricMatrix) -> Result<Self> {
        let n = g.order();
        let mut l = vec![0.0; n * n];
        for j in 0..n {
            let mut diag = g.get(j, j);
            for k in 0..j {
                diag -= l[j * n + k] * l[j * n + k];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    row: j,
                    pivot: diag,
                });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = g.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { order: n, lower: l })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.order;
        let l = &self.lower;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= l[i * n + k] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * y[k];
            }
            y[i] = s / l[i * n + i];
        }
        y
    }
}

/// Solves `G d = rhs` for positive definite `G` by Cholesky factorization with
/// one step of iterative refinement.
pub fn solve_spd_direct(g: &DenseSymmetricMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    check_len(g.order(), rhs.len())?;
    let chol = Cholesky::factor(g)?;
    let mut d = chol.solve(rhs);
    let gd = g.mul_vec(&d);
    let resid: Vec<f64> = rhs.iter().zip(&gd).map(|(r, x)| r - x).collect();
    let corr = chol.solve(&resid);
    for (di, ci) in d.iter_mut().zip(&corr) {
        *di += ci;
    }
    if d.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("Cholesky solution"));
    }
    Ok(d)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}
