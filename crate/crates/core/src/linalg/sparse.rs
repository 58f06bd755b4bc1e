use crate::error::{Error, Result};

/// Compressed sparse column matrix.
///
/// Row indices are 0-based and strictly ascending within each column. Explicit
/// zeros are kept as stored values.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumnMatrix {
    rows: usize,
    cols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseColumnMatrix {
    pub fn new(
        rows: usize,
        cols: usize,
        col_ptr: Vec<usize>,
        row_idx: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if col_ptr.len() != cols + 1 {
            return Err(Error::DimensionMismatch {
                expected: cols + 1,
                got: col_ptr.len(),
            });
        }
        if row_idx.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: row_idx.len(),
                got: values.len(),
            });
        }
        if col_ptr[0] != 0 || col_ptr[cols] != row_idx.len() {
            return Err(Error::InvalidParameter(
                "column pointer array must start at 0 and end at nnz".into(),
            ));
        }
        for j in 0..cols {
            let (lo, hi) = (col_ptr[j], col_ptr[j + 1]);
            if lo > hi {
                return Err(Error::InvalidParameter(format!(
                    "column pointers decrease at column {j}"
                )));
            }
            let idx = &row_idx[lo..hi];
            if idx.iter().any(|&i| i >= rows) {
                return Err(Error::InvalidParameter(format!(
                    "row index out of bounds in column {j}"
                )));
            }
            if idx.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(format!(
                    "row indices not strictly ascending in column {j}"
                )));
            }
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        Ok(Self {
            rows,
            cols,
            col_ptr,
            row_idx,
            values,
        })
    }

    /// Builds from `(row, col, value)` triplets in any order. Duplicate
    /// positions are rejected.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        for &(i, j, _) in &sorted {
            if i >= rows || j >= cols {
                return Err(Error::InvalidParameter(format!(
                    "triplet ({i}, {j}) outside a {rows}x{cols} matrix"
                )));
            }
        }
        sorted.sort_by_key(|a| (a.1, a.0));
        let mut col_ptr = vec![0usize; cols + 1];
        let mut row_idx = Vec::with_capacity(sorted.len());
        let mut values = Vec::with_capacity(sorted.len());
        for (k, &(i, j, v)) in sorted.iter().enumerate() {
            if k > 0 && sorted[k - 1].0 == i && sorted[k - 1].1 == j {
                return Err(Error::InvalidParameter(format!(
                    "duplicate entry ({i}, {j})"
                )));
            }
            col_ptr[j + 1] += 1;
            row_idx.push(i);
            values.push(v);
        }
        for j in 0..cols {
            col_ptr[j + 1] += col_ptr[j];
        }
        Self::new(rows, cols, col_ptr, row_idx, values)
    }

    /// Builds from a dense row-major array, dropping exact zeros.
    pub fn from_dense(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                got: data.len(),
            });
        }
        let mut triplets = Vec::new();
        for i in 0..rows {
            for j in 0..cols {
                let v = data[i * cols + j];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(rows, cols, &triplets)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            rows: n,
            cols: n,
            col_ptr: (0..=n).collect(),
            row_idx: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn col_ptr(&self) -> &[usize] {
        &self.col_ptr
    }

    pub fn row_indices(&self) -> &[usize] {
        &self.row_idx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Row indices and values of column `j`.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `A x`. Columns with `x_j == 0` are skipped, and the remaining columns are
    /// accumulated in ascending order.
    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.cols, x.len())?;
        let mut out = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let (idx, vals) = self.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                out[i] += v * xj;
            }
        }
        Ok(out)
    }

    /// `Aᵀ y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows, y.len())?;
        Ok((0..self.cols)
            .map(|j| {
                let (idx, vals) = self.column(j);
                idx.iter().zip(vals).map(|(&i, &v)| v * y[i]).sum()
            })
            .collect())
    }

    /// The column submatrix `A_S` for ascending, in-bounds `cols`.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let mut col_ptr = Vec::with_capacity(cols.len() + 1);
        col_ptr.push(0);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for &j in cols {
            if j >= self.cols {
                return Err(Error::InvalidParameter(format!("column {j} out of bounds")));
            }
            let (idx, vals) = self.column(j);
            row_idx.extend_from_slice(idx);
            values.extend_from_slice(vals);
            col_ptr.push(row_idx.len());
        }
        Ok(Self {
            rows: self.rows,
            cols: cols.len(),
            col_ptr,
            row_idx,
            values,
        })
    }

    /// `‖A_j‖₁` for every column.
    pub fn column_l1_norms(&self) -> Vec<f64> {
        (0..self.cols)
            .map(|j| self.column(j).1.iter().map(|v| v.abs()).sum())
            .collect()
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for j in 0..self.cols {
            let (idx, vals) = self.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                out[i * self.cols + j] = v;
            }
        }
        out
    }

    /// Row-wise view `(row -> [(col, value)])`, columns ascending in each row.
    pub fn row_lists(&self) -> Vec<Vec<(usize, f64)>> {
        let mut rows = vec![Vec::new(); self.rows];
        for j in 0..self.cols {
            let (idx, vals) = self.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                rows[i].push((j, v));
            }
        }
        rows
    }

    /// Reorders rows: row `i` of the result is row `perm[i]` of `self`.
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Self> {
        check_len(self.rows, perm.len())?;
        let mut inverse = vec![usize::MAX; self.rows];
        for (new, &old) in perm.iter().enumerate() {
            if old >= self.rows || inverse[old] != usize::MAX {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
            inverse[old] = new;
        }
        let mut triplets = Vec::with_capacity(self.nnz());
        for j in 0..self.cols {
            let (idx, vals) = self.column(j);
            for (&i, &v) in idx.iter().zip(vals) {
                triplets.push((inverse[i], j, v));
            }
        }
        Self::from_triplets(self.rows, self.cols, &triplets)
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
