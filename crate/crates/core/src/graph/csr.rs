//! Compressed sparse row storage with the handful of kernels the rest of the
//! crate needs: sparse-dense products, sparse-sparse products with an nnz
//! budget, and diagonal scaling.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{check_dim, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a matrix from `(row, col, value)` triplets. Duplicate positions
    /// are summed and columns are sorted within each row.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self> {
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        for (i, j, v) in triplets {
            if i >= n_rows {
                return Err(Error::IndexOutOfRange { index: i, n: n_rows });
            }
            if j >= n_cols {
                return Err(Error::IndexOutOfRange { index: j, n: n_cols });
            }
            entries.push((i, j, v));
        }
        entries.sort_by_key(|&(i, j, _)| (i, j));

        let mut row_offsets = vec![0usize; n_rows + 1];
        let mut col_indices = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in entries {
            if last == Some((i, j)) {
                *values.last_mut().expect("duplicate follows an entry") += v;
                continue;
            }
            last = Some((i, j));
            row_offsets[i + 1] += 1;
            col_indices.push(j);
            values.push(v);
        }
        for i in 0..n_rows {
            row_offsets[i + 1] += row_offsets[i];
        }
        Ok(Self {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Stores the nonzero entries of a dense matrix.
    pub fn from_dense(x: ArrayView2<'_, f64>) -> Self {
        let mut row_offsets = Vec::with_capacity(x.nrows() + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for row in x.rows() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(values.len());
        }
        Self {
            n_rows: x.nrows(),
            n_cols: x.ncols(),
            row_offsets,
            col_indices,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Column indices and values of row `i`.
    /// Stored values in row-major order; the sparsity pattern is fixed.
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let range = self.row_offsets[i]..self.row_offsets[i + 1];
        (&self.col_indices[range.clone()], &self.values[range])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_rows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    pub fn row_sums(&self) -> Array1<f64> {
        (0..self.n_rows)
            .map(|i| self.row(i).1.iter().sum::<f64>())
            .collect()
    }

    pub fn map_values(&self, f: impl Fn(usize, usize, f64) -> f64) -> Self {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for p in self.row_offsets[i]..self.row_offsets[i + 1] {
                out.values[p] = f(i, self.col_indices[p], self.values[p]);
            }
        }
        out
    }

    /// `diag(left) · self · diag(right)`.
    pub fn scale(&self, left: &[f64], right: &[f64]) -> Self {
        self.map_values(|i, j, v| left[i] * v * right[j])
    }

    /// `self + alpha·I` for square matrices.
    pub fn add_diagonal(&self, alpha: f64) -> Self {
        debug_assert_eq!(self.n_rows, self.n_cols);
        let identity = (0..self.n_rows).map(|i| (i, i, alpha));
        Self::from_triplets(self.n_rows, self.n_cols, self.iter().chain(identity))
            .expect("indices come from a valid matrix")
    }

    /// Linear combination `a·self + b·other` of equally shaped matrices.
    pub fn add_scaled(&self, a: f64, other: &CsrMatrix, b: f64) -> Result<Self> {
        check_dim("sparse addition rows", self.n_rows, other.n_rows)?;
        check_dim("sparse addition cols", self.n_cols, other.n_cols)?;
        let lhs = self.iter().map(|(i, j, v)| (i, j, a * v));
        let rhs = other.iter().map(|(i, j, v)| (i, j, b * v));
        Self::from_triplets(self.n_rows, self.n_cols, lhs.chain(rhs))
    }

    pub fn mul_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim("sparse matrix-vector product", self.n_cols, x.len())?;
        Ok((0..self.n_rows)
            .map(|i| {
                let (cols, vals) = self.row(i);
                cols.iter().zip(vals).map(|(&j, &v)| v * x[j]).sum()
            })
            .collect())
    }

    /// Sparse times dense: `self · x`.
    pub fn mul_dense(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        check_dim("sparse-dense product", self.n_cols, x.nrows())?;
        let mut out = Array2::<f64>::zeros((self.n_rows, x.ncols()));
        for (i, mut out_row) in out.axis_iter_mut(Axis(0)).enumerate() {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out_row.scaled_add(v, &x.row(j));
            }
        }
        Ok(out)
    }

    /// Transposed sparse times dense: `selfᵀ · y`.
    pub fn transpose_mul_dense(&self, y: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        check_dim("transposed sparse-dense product", self.n_rows, y.nrows())?;
        let mut out = Array2::<f64>::zeros((self.n_cols, y.ncols()));
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&j, &v) in cols.iter().zip(vals) {
                out.row_mut(j).scaled_add(v, &y.row(i));
            }
        }
        Ok(out)
    }

    /// Sparse-sparse product (Gustavson's row-wise algorithm). Fails with a
    /// density error as soon as the running nonzero count exceeds `budget`.
    pub fn matmul(&self, other: &CsrMatrix, budget: Option<usize>, k: usize) -> Result<Self> {
        check_dim("sparse-sparse product", self.n_cols, other.n_rows)?;
        let n_cols = other.n_cols;
        let mut accumulator = vec![0.0f64; n_cols];
        let mut marker = vec![usize::MAX; n_cols];
        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        row_offsets.push(0);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        let mut touched = Vec::new();

        for i in 0..self.n_rows {
            touched.clear();
            let (a_cols, a_vals) = self.row(i);
            for (&k_idx, &a) in a_cols.iter().zip(a_vals) {
                let (b_cols, b_vals) = other.row(k_idx);
                for (&j, &b) in b_cols.iter().zip(b_vals) {
                    if marker[j] != i {
                        marker[j] = i;
                        accumulator[j] = 0.0;
                        touched.push(j);
                    }
                    accumulator[j] += a * b;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                col_indices.push(j);
                values.push(accumulator[j]);
            }
            if let Some(budget) = budget {
                if col_indices.len() > budget {
                    return Err(Error::DensityBudget {
                        k,
                        nnz: col_indices.len(),
                        budget,
                    });
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(Self {
            n_rows: self.n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut out = Array2::zeros((self.n_rows, self.n_cols));
        for (i, j, v) in self.iter() {
            out[[i, j]] = v;
        }
        out
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.n_rows == self.n_cols
            && self
                .iter()
                .all(|(i, j, v)| (self.get(j, i) - v).abs() <= tol)
    }
}
