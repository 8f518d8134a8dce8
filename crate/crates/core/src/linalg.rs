//! Row-major dense matrices backed by faer kernels.
//!
//! Tensor-train cores are stored as flat row-major buffers, so every
//! unfolding used by the algorithms is a zero-copy reshape of a core. This
//! module wraps those buffers as faer views for the heavy kernels (GEMM, QR,
//! SVD) and hands row-major buffers back.

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};

use crate::error::{Result, TtError};

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    /// Wraps a row-major buffer. Panics if the length does not match.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            rows * cols,
            "buffer of length {} cannot be a {rows}x{cols} matrix",
            data.len()
        );
        Self { rows, cols, data }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix::from_vec(idx.len(), self.cols, data)
    }

    pub fn select_cols(&self, idx: &[usize]) -> Matrix {
        Matrix::from_fn(self.rows, idx.len(), |i, j| self.get(i, idx[j]))
    }

    /// Keeps the first `n` columns.
    pub fn leading_cols(&self, n: usize) -> Matrix {
        Matrix::from_fn(self.rows, n, |i, j| self.get(i, j))
    }

    /// Keeps the first `n` rows.
    pub fn leading_rows(&self, n: usize) -> Matrix {
        Matrix::from_vec(n, self.cols, self.data[..n * self.cols].to_vec())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn scale(&mut self, alpha: f64) {
        self.data.iter_mut().for_each(|x| *x *= alpha);
    }

    /// Reinterprets the buffer with a new shape of the same size.
    pub fn reshape(self, rows: usize, cols: usize) -> Matrix {
        Matrix::from_vec(rows, cols, self.data)
    }

    pub(crate) fn view(&self) -> MatRef<'_, f64> {
        MatRef::from_row_major_slice(&self.data, self.rows, self.cols)
    }

    pub fn matmul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        Matrix::from_vec(
            self.rows,
            rhs.cols,
            gemm(&self.data, self.rows, self.cols, &rhs.data, rhs.cols),
        )
    }

    /// Scales row `i` by `d[i]`.
    pub fn scale_rows(&mut self, d: &[f64]) {
        for (i, &di) in d.iter().enumerate() {
            let c = self.cols;
            self.data[i * c..(i + 1) * c].iter_mut().for_each(|x| *x *= di);
        }
    }
}

/// Row-major GEMM: `a` is `m x k`, `b` is `k x n`, the result is `m x n`.
pub fn gemm(a: &[f64], m: usize, k: usize, b: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    let mut out = vec![0.0; m * n];
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    let lhs = MatRef::from_row_major_slice(a, m, k);
    let rhs = MatRef::from_row_major_slice(b, k, n);
    let dst = MatMut::from_row_major_slice_mut(&mut out, m, n);
    matmul(dst, Accum::Replace, lhs, rhs, 1.0, Par::Seq);
    out
}

/// `a^T b` where `a` is stored row-major as `m x k` and `b` as `m x n`.
pub fn gemm_tn(a: &[f64], m: usize, k: usize, b: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), m * n);
    let mut out = vec![0.0; k * n];
    if m == 0 || n == 0 || k == 0 {
        return out;
    }
    let lhs = MatRef::from_row_major_slice(a, m, k).transpose();
    let rhs = MatRef::from_row_major_slice(b, m, n);
    let dst = MatMut::from_row_major_slice_mut(&mut out, k, n);
    matmul(dst, Accum::Replace, lhs, rhs, 1.0, Par::Seq);
    out
}

fn from_faer(m: MatRef<'_, f64>) -> Matrix {
    Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

/// Thin SVD `a = u diag(s) vt` with singular values in nonincreasing order.
pub struct ThinSvd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub vt: Matrix,
}

pub fn thin_svd(a: &Matrix) -> Result<ThinSvd> {
    let r = a.rows.min(a.cols);
    if r == 0 {
        return Ok(ThinSvd {
            u: Matrix::zeros(a.rows, 0),
            s: Vec::new(),
            vt: Matrix::zeros(0, a.cols),
        });
    }
    // faer prefers tall inputs; factor the transpose of wide matrices.
    if a.rows < a.cols {
        let t = thin_svd(&a.transpose())?;
        return Ok(ThinSvd {
            u: t.vt.transpose(),
            s: t.s,
            vt: t.u.transpose(),
        });
    }
    let svd = a
        .view()
        .thin_svd()
        .map_err(|e| TtError::Linalg(format!("svd did not converge: {e:?}")))?;
    let s: Vec<f64> = (0..r).map(|i| svd.S()[i]).collect();
    Ok(ThinSvd {
        u: from_faer(svd.U()),
        s,
        vt: from_faer(svd.V()).transpose(),
    })
}

/// Thin QR `a = q r` with `q` of shape `m x min(m, n)`.
pub fn thin_qr(a: &Matrix) -> (Matrix, Matrix) {
    let r = a.rows.min(a.cols);
    if r == 0 {
        return (Matrix::zeros(a.rows, 0), Matrix::zeros(0, a.cols));
    }
    let qr = a.view().qr();
    let q = from_faer(qr.compute_thin_Q().as_ref());
    let rr = from_faer(qr.thin_R());
    (q, rr)
}

/// Upper-triangular factor of a thin QR, skipping the orthogonal factor.
pub fn qr_r_factor(a: &Matrix) -> Matrix {
    if a.rows.min(a.cols) == 0 {
        return Matrix::zeros(0, a.cols);
    }
    from_faer(a.view().qr().thin_R())
}

/// Number of singular values to keep so that the discarded tail has
/// Euclidean mass at most `abs_tol`, capped at `chi_max` and at least 1.
pub fn truncation_rank(s: &[f64], chi_max: usize, abs_tol: f64) -> usize {
    if s.is_empty() {
        return 0;
    }
    let mut keep = s.len();
    let mut tail = 0.0;
    while keep > 1 {
        let next = tail + s[keep - 1] * s[keep - 1];
        if next.sqrt() > abs_tol {
            break;
        }
        tail = next;
        keep -= 1;
    }
    keep.min(chi_max).max(1)
}
