//! Compressed sparse row matrices and the structural kernels built on them.
//!
//! Every operator in a hierarchy (the system matrix, its coarse versions,
//! restriction and interpolation) is a [`SparseMatrix`]. The format is kept
//! canonical: within each row the column indices are strictly increasing and
//! no explicit zeros are stored after construction.

use crate::error::{AmgError, Result};
use crate::linalg::DenseMatrix;
use serde::{Deserialize, Serialize};

/// Real CSR matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseMatrix {
    n_rows: usize,
    n_cols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the structure and
    /// canonicalizing (sorting rows, summing duplicates, dropping zeros).
    pub fn from_csr(
        n_rows: usize,
        n_cols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != n_rows + 1 {
            return Err(AmgError::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                n_rows + 1
            )));
        }
        if row_offsets[0] != 0 || *row_offsets.last().unwrap() != values.len() {
            return Err(AmgError::InvalidStructure(
                "row_offsets must start at 0 and end at nnz".into(),
            ));
        }
        if col_indices.len() != values.len() {
            return Err(AmgError::InvalidStructure(
                "col_indices and values length mismatch".into(),
            ));
        }
        if row_offsets.windows(2).any(|w| w[0] > w[1]) {
            return Err(AmgError::InvalidStructure(
                "row_offsets must be non-decreasing".into(),
            ));
        }
        for &c in &col_indices {
            if c >= n_cols {
                return Err(AmgError::IndexOutOfRange {
                    index: c,
                    bound: n_cols,
                });
            }
        }
        let mut m = SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        };
        m.canonicalize();
        Ok(m)
    }

    /// Assembles from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= n_rows {
                return Err(AmgError::IndexOutOfRange {
                    index: r,
                    bound: n_rows,
                });
            }
            if c >= n_cols {
                return Err(AmgError::IndexOutOfRange {
                    index: c,
                    bound: n_cols,
                });
            }
        }
        let mut counts = vec![0usize; n_rows + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n_rows {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts.clone();
        let mut col_indices = vec![0usize; triplets.len()];
        let mut values = vec![0.0; triplets.len()];
        let mut cursor = row_offsets.clone();
        for &(r, c, v) in triplets {
            let p = cursor[r];
            col_indices[p] = c;
            values[p] = v;
            cursor[r] += 1;
        }
        let mut m = SparseMatrix {
            n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        };
        m.canonicalize();
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        SparseMatrix {
            n_rows: n,
            n_cols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    /// n_rows x n_cols matrix with no stored entries.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        SparseMatrix {
            n_rows,
            n_cols,
            row_offsets: vec![0; n_rows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
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

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Stored entry (i, j), or 0 if absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n_rows.min(self.n_cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    /// True when every row has strictly increasing column indices and no
    /// stored zero.
    pub fn is_canonical(&self) -> bool {
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            if cols.windows(2).any(|w| w[0] >= w[1]) {
                return false;
            }
            if vals.iter().any(|&v| v == 0.0) {
                return false;
            }
        }
        true
    }

    /// Sorts each row, sums duplicate entries, and drops stored zeros.
    pub fn canonicalize(&mut self) {
        let mut offsets = Vec::with_capacity(self.n_rows + 1);
        let mut cols = Vec::with_capacity(self.col_indices.len());
        let mut vals = Vec::with_capacity(self.values.len());
        offsets.push(0);
        let mut row: Vec<(usize, f64)> = Vec::new();
        for i in 0..self.n_rows {
            let lo = self.row_offsets[i];
            let hi = self.row_offsets[i + 1];
            row.clear();
            row.extend(
                self.col_indices[lo..hi]
                    .iter()
                    .copied()
                    .zip(self.values[lo..hi].iter().copied()),
            );
            row.sort_unstable_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row.len() {
                let c = row[k].0;
                let mut v = row[k].1;
                let mut j = k + 1;
                while j < row.len() && row[j].0 == c {
                    v += row[j].1;
                    j += 1;
                }
                if v != 0.0 {
                    cols.push(c);
                    vals.push(v);
                }
                k = j;
            }
            offsets.push(cols.len());
        }
        self.row_offsets = offsets;
        self.col_indices = cols;
        self.values = vals;
    }

    /// y = A x.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_cols {
            return Err(AmgError::DimensionMismatch {
                context: "spmv",
                expected: self.n_cols,
                got: x.len(),
            });
        }
        let mut y = vec![0.0; self.n_rows];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    pub fn transpose(&self) -> SparseMatrix {
        let nnz = self.nnz();
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.n_cols {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts.clone();
        let mut col_indices = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut cursor = row_offsets.clone();
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                let p = cursor[c];
                col_indices[p] = i;
                values[p] = v;
                cursor[c] += 1;
            }
        }
        // Rows come out sorted because the source rows are scanned in order.
        SparseMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_offsets,
            col_indices,
            values,
        }
    }

    /// Sparse product A * B with a dense accumulator per row.
    pub fn matmul(&self, b: &SparseMatrix) -> Result<SparseMatrix> {
        if self.n_cols != b.n_rows {
            return Err(AmgError::DimensionMismatch {
                context: "matmul",
                expected: self.n_cols,
                got: b.n_rows,
            });
        }
        let n_cols = b.n_cols;
        let mut acc = vec![0.0f64; n_cols];
        let mut marker = vec![usize::MAX; n_cols];
        let mut touched: Vec<usize> = Vec::new();

        let mut row_offsets = Vec::with_capacity(self.n_rows + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);

        for i in 0..self.n_rows {
            touched.clear();
            let (a_cols, a_vals) = self.row(i);
            for (&k, &av) in a_cols.iter().zip(a_vals) {
                let (b_cols, b_vals) = b.row(k);
                for (&j, &bv) in b_cols.iter().zip(b_vals) {
                    if marker[j] != i {
                        marker[j] = i;
                        acc[j] = 0.0;
                        touched.push(j);
                    }
                    acc[j] += av * bv;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                if acc[j] != 0.0 {
                    col_indices.push(j);
                    values.push(acc[j]);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Ok(SparseMatrix {
            n_rows: self.n_rows,
            n_cols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Dense block A[rows, cols]; absent entries are zero.
    pub fn extract_submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<DenseMatrix> {
        for &r in rows {
            if r >= self.n_rows {
                return Err(AmgError::IndexOutOfRange {
                    index: r,
                    bound: self.n_rows,
                });
            }
        }
        for &c in cols {
            if c >= self.n_cols {
                return Err(AmgError::IndexOutOfRange {
                    index: c,
                    bound: self.n_cols,
                });
            }
        }
        // Position of each requested column, or MAX if not requested.
        let mut col_pos = vec![usize::MAX; self.n_cols];
        for (p, &c) in cols.iter().enumerate() {
            debug_assert!(col_pos[c] == usize::MAX, "duplicate column index");
            col_pos[c] = p;
        }
        let mut out = DenseMatrix::zeros(rows.len(), cols.len());
        for (ri, &r) in rows.iter().enumerate() {
            let (rcols, rvals) = self.row(r);
            for (&c, &v) in rcols.iter().zip(rvals) {
                let p = col_pos[c];
                if p != usize::MAX {
                    out[(ri, p)] = v;
                }
            }
        }
        Ok(out)
    }

    /// Drops off-diagonal entries with |a_ij| < drop_tol * max_{k != i}|a_ik|.
    /// The diagonal is always kept; nothing is lumped.
    pub fn filter_small(&self, drop_tol: f64) -> SparseMatrix {
        assert!(drop_tol >= 0.0, "drop tolerance must be nonnegative");
        let mut triplets = Vec::with_capacity(self.nnz());
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            let row_max = cols
                .iter()
                .zip(vals)
                .filter(|&(&c, _)| c != i)
                .map(|(_, &v)| v.abs())
                .fold(0.0f64, f64::max);
            let cutoff = drop_tol * row_max;
            for (&c, &v) in cols.iter().zip(vals) {
                if c == i || v.abs() >= cutoff {
                    triplets.push((i, c, v));
                }
            }
        }
        SparseMatrix::from_triplets(self.n_rows, self.n_cols, &triplets).unwrap()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                d[(i, c)] = v;
            }
        }
        d
    }

    pub fn from_dense(d: &DenseMatrix) -> SparseMatrix {
        let mut triplets = Vec::new();
        for i in 0..d.n_rows() {
            for j in 0..d.n_cols() {
                let v = d[(i, j)];
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        SparseMatrix::from_triplets(d.n_rows(), d.n_cols(), &triplets).unwrap()
    }

    /// Scales every row by the given factors: A <- diag(s) A.
    pub fn scale_rows(&self, s: &[f64]) -> Result<SparseMatrix> {
        if s.len() != self.n_rows {
            return Err(AmgError::DimensionMismatch {
                context: "scale_rows",
                expected: self.n_rows,
                got: s.len(),
            });
        }
        let mut out = self.clone();
        for i in 0..self.n_rows {
            let lo = out.row_offsets[i];
            let hi = out.row_offsets[i + 1];
            for v in &mut out.values[lo..hi] {
                *v *= s[i];
            }
        }
        out.canonicalize();
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// R * A * P, the Galerkin coarse operator.
pub fn triple_product(
    r: &SparseMatrix,
    a: &SparseMatrix,
    p: &SparseMatrix,
) -> Result<SparseMatrix> {
    r.matmul(a)?.matmul(p)
}
