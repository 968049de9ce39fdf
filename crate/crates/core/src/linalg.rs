//! Small dense kernels: LU with partial pivoting, one-sided Jacobi SVD,
//! minimum-norm least squares, symmetric Jacobi eigendecomposition, and
//! Arnoldi-based spectral radius estimation.
//!
//! Everything here targets desk-scale blocks (local transfer systems, coarse
//! solves, analysis matrices up to a couple thousand rows); none of it is
//! meant to compete with tuned BLAS.

use crate::error::{AmgError, Result};
use crate::sparse::SparseMatrix;
use serde::{Deserialize, Serialize};
use std::ops::{Index, IndexMut};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    n_rows: usize,
    n_cols: usize,
    values: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix {
            n_rows,
            n_cols,
            values: vec![0.0; n_rows * n_cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = DenseMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n_rows = rows.len();
        let n_cols = if n_rows > 0 { rows[0].len() } else { 0 };
        let mut values = Vec::with_capacity(n_rows * n_cols);
        for r in rows {
            assert_eq!(r.len(), n_cols);
            values.extend_from_slice(r);
        }
        DenseMatrix {
            n_rows,
            n_cols,
            values,
        }
    }

    /// Column vector from a slice.
    pub fn from_column(v: &[f64]) -> Self {
        DenseMatrix {
            n_rows: v.len(),
            n_cols: 1,
            values: v.to_vec(),
        }
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.values[i * self.n_cols..(i + 1) * self.n_cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.n_cols, self.n_rows);
        for i in 0..self.n_rows {
            for j in 0..self.n_cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.n_cols, b.n_rows, "dense matmul shape mismatch");
        let mut c = DenseMatrix::zeros(self.n_rows, b.n_cols);
        for i in 0..self.n_rows {
            for k in 0..self.n_cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let brow = b.row(k);
                let crow = c.row_mut(i);
                for j in 0..brow.len() {
                    crow[j] += a * brow[j];
                }
            }
        }
        c
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(self.n_cols, x.len(), "dense matvec shape mismatch");
        (0..self.n_rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        let mut out = self.clone();
        for v in &mut out.values {
            *v *= s;
        }
        out
    }

    pub fn add(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.n_rows, self.n_cols), (b.n_rows, b.n_cols));
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&b.values) {
            *v += w;
        }
        out
    }

    pub fn sub(&self, b: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.n_rows, self.n_cols), (b.n_rows, b.n_cols));
        let mut out = self.clone();
        for (v, w) in out.values.iter_mut().zip(&b.values) {
            *v -= w;
        }
        out
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// (M + M^T) / 2.
    pub fn symmetrized(&self) -> DenseMatrix {
        assert_eq!(self.n_rows, self.n_cols);
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for j in (i + 1)..self.n_cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.values[i * self.n_cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.values[i * self.n_cols + j]
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn vec_norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

// ---------------------------------------------------------------------------
// LU with partial pivoting
// ---------------------------------------------------------------------------

/// Factored form of a square matrix, reusable across right-hand sides.
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(m: &DenseMatrix) -> Result<LuFactors> {
        if m.n_rows() != m.n_cols() {
            return Err(AmgError::DimensionMismatch {
                context: "lu factor requires a square matrix",
                expected: m.n_rows(),
                got: m.n_cols(),
            });
        }
        let n = m.n_rows();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_val = lu[(k, k)].abs();
            for i in (k + 1)..n {
                let v = lu[(i, k)].abs();
                if v > pivot_val {
                    pivot_val = v;
                    pivot_row = i;
                }
            }
            if pivot_val < 1e-14 * scale {
                return Err(AmgError::SingularMatrix(format!(
                    "pivot {pivot_val:.3e} below threshold at column {k}"
                )));
            }
            if pivot_row != k {
                perm.swap(k, pivot_row);
                for j in 0..n {
                    let a = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = a;
                }
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                for j in (k + 1)..n {
                    let v = lu[(k, j)];
                    lu[(i, j)] -= f * v;
                }
            }
        }
        Ok(LuFactors { lu, perm })
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.lu.n_rows();
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut acc = x[i];
            for j in 0..i {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in (i + 1)..n {
                acc -= self.lu[(i, j)] * x[j];
            }
            x[i] = acc / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, rhs: &DenseMatrix) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(rhs.n_rows(), rhs.n_cols());
        for j in 0..rhs.n_cols() {
            let col = rhs.column(j);
            let x = self.solve_vec(&col);
            for i in 0..rhs.n_rows() {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

/// Solves M X = rhs by partial-pivoting LU.
pub fn lu_solve(m: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    if m.n_rows() != rhs.n_rows() {
        return Err(AmgError::DimensionMismatch {
            context: "lu_solve rhs rows",
            expected: m.n_rows(),
            got: rhs.n_rows(),
        });
    }
    Ok(LuFactors::factor(m)?.solve(rhs))
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD
// ---------------------------------------------------------------------------

/// Thin SVD with singular values in ascending order.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub u: DenseMatrix,
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
}

impl SvdResult {
    pub fn sigma_max(&self) -> f64 {
        *self.singular_values.last().unwrap_or(&0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        *self.singular_values.first().unwrap_or(&0.0)
    }

    pub fn reconstruct(&self) -> DenseMatrix {
        let r = self.singular_values.len();
        let mut scaled = self.u.clone();
        for j in 0..r {
            for i in 0..scaled.n_rows() {
                scaled[(i, j)] *= self.singular_values[j];
            }
        }
        scaled.matmul(&self.v.transpose())
    }
}

const SVD_MAX_SWEEPS: usize = 60;

/// One-sided Jacobi SVD. Works on whichever of A or A^T is tall, rotating
/// column pairs until they are numerically orthogonal.
pub fn svd(m: &DenseMatrix) -> Result<SvdResult> {
    if m.n_rows() >= m.n_cols() {
        svd_tall(m)
    } else {
        let r = svd_tall(&m.transpose())?;
        Ok(SvdResult {
            u: r.v,
            singular_values: r.singular_values,
            v: r.u,
        })
    }
}

fn svd_tall(m: &DenseMatrix) -> Result<SvdResult> {
    let n_rows = m.n_rows();
    let n_cols = m.n_cols();
    // Columns of A stored contiguously (as rows of the work buffer) so that
    // rotations stream through memory.
    let mut w: Vec<Vec<f64>> = (0..n_cols).map(|j| m.column(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n_cols)
        .map(|j| {
            let mut e = vec![0.0; n_cols];
            e[j] = 1.0;
            e
        })
        .collect();

    let eps = 1e-15;
    let mut converged = false;
    for _sweep in 0..SVD_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n_cols.saturating_sub(1) {
            for q in (p + 1)..n_cols {
                let (wp, wq) = pair_mut(&mut w, p, q);
                let app = dot(wp, wp);
                let aqq = dot(wq, wq);
                let apq = dot(wp, wq);
                if apq.abs() <= eps * (app * aqq).sqrt() || apq == 0.0 {
                    continue;
                }
                rotated = true;
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_pair(wp, wq, c, s);
                let (vp, vq) = pair_mut(&mut v, p, q);
                rotate_pair(vp, vq, c, s);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(AmgError::SvdNonConvergence(SVD_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n_cols).collect();
    let norms: Vec<f64> = w.iter().map(|c| vec_norm(c)).collect();
    order.sort_by(|&a, &b| norms[a].partial_cmp(&norms[b]).unwrap());

    let mut u = DenseMatrix::zeros(n_rows, n_cols);
    let mut vm = DenseMatrix::zeros(n_cols, n_cols);
    let mut sigma = Vec::with_capacity(n_cols);
    let mut null_cols = Vec::new();
    for (jj, &j) in order.iter().enumerate() {
        let s = norms[j];
        sigma.push(s);
        if s > 0.0 {
            for i in 0..n_rows {
                u[(i, jj)] = w[j][i] / s;
            }
        } else {
            null_cols.push(jj);
        }
        for i in 0..n_cols {
            vm[(i, jj)] = v[j][i];
        }
    }
    // Zero singular values leave U columns undefined; fill them with an
    // orthonormal completion so U^T U = I still holds.
    for &jj in &null_cols {
        complete_orthonormal_column(&mut u, jj);
    }
    Ok(SvdResult {
        u,
        singular_values: sigma,
        v: vm,
    })
}

fn pair_mut(v: &mut [Vec<f64>], p: usize, q: usize) -> (&mut [f64], &mut [f64]) {
    debug_assert!(p < q);
    let (lo, hi) = v.split_at_mut(q);
    (&mut lo[p], &mut hi[0])
}

fn rotate_pair(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let xa = *x;
        let yb = *y;
        *x = c * xa - s * yb;
        *y = s * xa + c * yb;
    }
}

fn complete_orthonormal_column(u: &mut DenseMatrix, target: usize) {
    let n_rows = u.n_rows();
    let n_cols = u.n_cols();
    for seed in 0..n_rows {
        let mut cand = vec![0.0; n_rows];
        cand[seed] = 1.0;
        for j in 0..n_cols {
            if j == target {
                continue;
            }
            let col = u.column(j);
            let proj = dot(&cand, &col);
            for i in 0..n_rows {
                cand[i] -= proj * col[i];
            }
        }
        let nrm = vec_norm(&cand);
        if nrm > 1e-8 {
            for i in 0..n_rows {
                u[(i, target)] = cand[i] / nrm;
            }
            return;
        }
    }
}

/// Minimum-norm least-squares solution via the SVD pseudoinverse,
/// truncating singular values below 1e-12 * sigma_max.
pub fn min_norm_ls(m: &DenseMatrix, rhs: &[f64]) -> Vec<f64> {
    assert_eq!(m.n_rows(), rhs.len(), "min_norm_ls rhs length");
    let dec = svd(m).expect("jacobi svd did not converge");
    let cutoff = 1e-12 * dec.sigma_max();
    let mut x = vec![0.0; m.n_cols()];
    for (j, &s) in dec.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let uj = dec.u.column(j);
        let coef = dot(&uj, rhs) / s;
        for i in 0..m.n_cols() {
            x[i] += coef * dec.v[(i, j)];
        }
    }
    x
}

// ---------------------------------------------------------------------------
// Symmetric Jacobi eigendecomposition
// ---------------------------------------------------------------------------

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues in ascending order with eigenvectors as columns.
pub fn sym_eig(m: &DenseMatrix) -> Result<(Vec<f64>, DenseMatrix)> {
    if m.n_rows() != m.n_cols() {
        return Err(AmgError::DimensionMismatch {
            context: "sym_eig requires a square matrix",
            expected: m.n_rows(),
            got: m.n_cols(),
        });
    }
    let n = m.n_rows();
    let mut a = m.clone();
    let mut v = DenseMatrix::identity(n);
    let max_sweeps = 100;
    let mut done = false;
    for sweep in 0..max_sweeps {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a[(i, j)].abs();
            }
        }
        if off == 0.0 {
            done = true;
            break;
        }
        let tresh = if sweep < 3 {
            0.2 * off / (n * n) as f64
        } else {
            0.0
        };
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let g = 100.0 * apq.abs();
                if sweep > 3
                    && a[(p, p)].abs() + g == a[(p, p)].abs()
                    && a[(q, q)].abs() + g == a[(q, q)].abs()
                {
                    a[(p, q)] = 0.0;
                    a[(q, p)] = 0.0;
                    continue;
                }
                if apq.abs() <= tresh {
                    continue;
                }
                let h = a[(q, q)] - a[(p, p)];
                let t = if h.abs() + g == h.abs() {
                    apq / h
                } else {
                    let theta = 0.5 * h / apq;
                    let mut t = 1.0 / (theta.abs() + (1.0 + theta * theta).sqrt());
                    if theta < 0.0 {
                        t = -t;
                    }
                    t
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                a[(p, p)] = app - t * apq;
                a[(q, q)] = aqq + t * apq;
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for i in 0..n {
                    if i != p && i != q {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = aip - s * (aiq + tau * aip);
                        a[(i, q)] = aiq + s * (aip - tau * aiq);
                        a[(p, i)] = a[(i, p)];
                        a[(q, i)] = a[(i, q)];
                    }
                }
                for i in 0..n {
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip - s * (viq + tau * vip);
                    v[(i, q)] = viq + s * (vip - tau * viq);
                }
            }
        }
    }
    if !done {
        // Final off-diagonal check; near-machine-zero residual is fine.
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(a[(i, j)].abs());
            }
        }
        if off > 1e-10 * m.max_abs().max(1e-300) {
            return Err(AmgError::SvdNonConvergence(max_sweeps));
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].partial_cmp(&a[(j, j)]).unwrap());
    let eigvals: Vec<f64> = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vecs = DenseMatrix::zeros(n, n);
    for (jj, &j) in order.iter().enumerate() {
        for i in 0..n {
            vecs[(i, jj)] = v[(i, j)];
        }
    }
    Ok((eigvals, vecs))
}

// ---------------------------------------------------------------------------
// Hessenberg eigenvalues and Arnoldi spectral radius
// ---------------------------------------------------------------------------

/// Eigenvalues of a real upper Hessenberg matrix via the shifted QR
/// iteration (classic EISPACK hqr scheme). Returns (re, im) pairs.
pub fn hessenberg_eigenvalues(h: &DenseMatrix) -> Result<Vec<(f64, f64)>> {
    assert_eq!(h.n_rows(), h.n_cols());
    let n = h.n_rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut a = h.clone();
    let mut eigs = Vec::with_capacity(n);
    let anorm: f64 = {
        let mut s = 0.0;
        for i in 0..n {
            for j in i.saturating_sub(1)..n {
                s += a[(i, j)].abs();
            }
        }
        s.max(f64::MIN_POSITIVE)
    };
    let eps = f64::EPSILON;
    let mut t = 0.0f64;
    let mut nn = n as isize - 1;
    while nn >= 0 {
        let mut its = 0;
        loop {
            // Look for a single small subdiagonal element.
            let mut l = nn;
            while l >= 1 {
                let s = (a[(l as usize - 1, l as usize - 1)].abs()
                    + a[(l as usize, l as usize)].abs())
                .max(anorm);
                if a[(l as usize, l as usize - 1)].abs() <= eps * s {
                    a[(l as usize, l as usize - 1)] = 0.0;
                    break;
                }
                l -= 1;
            }
            let x = a[(nn as usize, nn as usize)];
            if l == nn {
                eigs.push((x + t, 0.0));
                nn -= 1;
                break;
            }
            let y = a[(nn as usize - 1, nn as usize - 1)];
            let w = a[(nn as usize, nn as usize - 1)] * a[(nn as usize - 1, nn as usize)];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let z = q.abs().sqrt();
                let x = x + t;
                if q >= 0.0 {
                    let z = p + z.copysign(p);
                    eigs.push((x + z, 0.0));
                    if z != 0.0 {
                        eigs.push((x - w / z, 0.0));
                    } else {
                        eigs.push((x + z, 0.0));
                    }
                } else {
                    eigs.push((x + p, z));
                    eigs.push((x + p, -z));
                }
                nn -= 2;
                break;
            }
            if its == 60 {
                return Err(AmgError::SvdNonConvergence(60));
            }
            let (mut x, mut y, mut w) = (x, y, w);
            if its == 10 || its == 20 || its == 30 || its == 40 || its == 50 {
                // Exceptional shift.
                t += x;
                for i in 0..=nn as usize {
                    a[(i, i)] -= x;
                }
                let s = a[(nn as usize, nn as usize - 1)].abs()
                    + a[(nn as usize - 1, nn as usize - 2)].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            // Find two consecutive small subdiagonals.
            let mut m = nn - 2;
            let (mut p, mut q, mut r) = (0.0f64, 0.0f64, 0.0f64);
            while m >= l {
                let mu = m as usize;
                let z = a[(mu, mu)];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[(mu + 1, mu)] + a[(mu, mu + 1)];
                q = a[(mu + 1, mu + 1)] - z - rr - ss;
                r = a[(mu + 2, mu + 1)];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[(mu, mu - 1)].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[(mu - 1, mu - 1)].abs() + z.abs() + a[(mu + 1, mu + 1)].abs());
                if u <= eps * v {
                    break;
                }
                m -= 1;
            }
            for i in (m + 2)..=nn {
                let iu = i as usize;
                a[(iu, iu - 2)] = 0.0;
                if i > m + 2 {
                    a[(iu, iu - 3)] = 0.0;
                }
            }
            // Double QR step on rows l..nn.
            for k in m..=(nn - 1) {
                let ku = k as usize;
                if k != m {
                    p = a[(ku, ku - 1)];
                    q = a[(ku + 1, ku - 1)];
                    r = if k != nn - 1 {
                        a[(ku + 2, ku - 1)]
                    } else {
                        0.0
                    };
                    let x2 = p.abs() + q.abs() + r.abs();
                    if x2 != 0.0 {
                        p /= x2;
                        q /= x2;
                        r /= x2;
                    } else {
                        continue;
                    }
                    x = x2;
                } else {
                    x = 1.0;
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s == 0.0 {
                    continue;
                }
                if k == m {
                    if l != m {
                        a[(ku, ku - 1)] = -a[(ku, ku - 1)];
                    }
                } else {
                    a[(ku, ku - 1)] = -s * x;
                }
                p += s;
                let x3 = p / s;
                let y3 = q / s;
                let z3 = r / s;
                q /= p;
                r /= p;
                for j in ku..=(nn as usize) {
                    let mut pp = a[(ku, j)] + q * a[(ku + 1, j)];
                    if k != nn - 1 {
                        pp += r * a[(ku + 2, j)];
                        a[(ku + 2, j)] -= pp * z3;
                    }
                    a[(ku + 1, j)] -= pp * y3;
                    a[(ku, j)] -= pp * x3;
                }
                let mmin = if nn < k + 3 { nn as usize } else { ku + 3 };
                for i in (l as usize)..=mmin {
                    let mut pp = x3 * a[(i, ku)] + y3 * a[(i, ku + 1)];
                    if k != nn - 1 {
                        pp += z3 * a[(i, ku + 2)];
                        a[(i, ku + 2)] -= pp * r;
                    }
                    a[(i, ku + 1)] -= pp * q;
                    a[(i, ku)] -= pp;
                }
            }
        }
    }
    Ok(eigs)
}

/// Spectral radius estimate from `iters` Arnoldi iterations with the
/// normalized all-ones start vector. On early breakdown the estimate comes
/// from the smaller Hessenberg block (which is then exact on the Krylov
/// subspace found).
pub fn estimate_spectral_radius(a: &SparseMatrix, iters: usize) -> Result<f64> {
    if a.n_rows() != a.n_cols() {
        return Err(AmgError::DimensionMismatch {
            context: "spectral radius requires a square matrix",
            expected: a.n_rows(),
            got: a.n_cols(),
        });
    }
    assert!(iters >= 1, "at least one Arnoldi iteration required");
    let n = a.n_rows();
    if n == 0 {
        return Ok(0.0);
    }
    let m = iters.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    let inv = 1.0 / (n as f64).sqrt();
    basis.push(vec![inv; n]);
    let mut h = DenseMatrix::zeros(m, m);
    let mut h_scale = 0.0f64;
    let mut dim = 0;
    for j in 0..m {
        let mut w = a.spmv(&basis[j])?;
        // Modified Gram-Schmidt with one re-orthogonalization pass.
        for _ in 0..2 {
            for (i, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                h[(i, j)] += c;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= c * vk;
                }
            }
        }
        dim = j + 1;
        h_scale = h_scale.max(h.column(j).iter().fold(0.0f64, |acc, v| acc.max(v.abs())));
        let nrm = vec_norm(&w);
        if nrm <= 1e-12 * h_scale.max(f64::MIN_POSITIVE) {
            break; // invariant subspace found
        }
        if j + 1 < m {
            h[(j + 1, j)] = nrm;
            for wk in &mut w {
                *wk /= nrm;
            }
            basis.push(w);
        }
    }
    let mut hk = DenseMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            hk[(i, j)] = h[(i, j)];
        }
    }
    let eigs = hessenberg_eigenvalues(&hk)?;
    Ok(eigs
        .iter()
        .map(|&(re, im)| (re * re + im * im).sqrt())
        .fold(0.0f64, f64::max))
}
