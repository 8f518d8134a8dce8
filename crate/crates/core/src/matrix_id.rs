//! Row interpolative decomposition `M ~ X R` by partial rank-revealing LU.
//!
//! `R` is a subset of the rows of `M` and `X` contains an exact identity at
//! those rows. Pivots are chosen greedily by full pivoting on the Schur
//! complement.

use crate::error::{Result, TtError};
use crate::linalg::Matrix;
use crate::ops::OpCounter;

#[derive(Clone, Debug)]
pub struct InterpolativeFactor {
    /// Interpolation matrix, `rows x rank`.
    pub x: Matrix,
    /// Selected rows in selection order.
    pub pivots: Vec<usize>,
    /// Columns paired with each selected row.
    pub col_pivots: Vec<usize>,
    /// Copies of the selected rows, `rank x cols`.
    pub skeleton: Matrix,
    pub rank: usize,
    /// Largest remaining Schur-complement magnitude when pivoting stopped.
    pub local_error: f64,
    /// Magnitude of the first pivot (0 for a zero matrix).
    pub first_pivot: f64,
}

impl InterpolativeFactor {
    pub fn reconstruct(&self) -> Matrix {
        self.x.matmul(&self.skeleton)
    }

    /// Whether pivoting stopped because of the rank cap while the remainder
    /// was still above the relative tolerance.
    pub fn rank_capped(&self, chi_max: usize, eps_id: f64) -> bool {
        self.rank == chi_max && self.local_error > eps_id * self.first_pivot
    }
}

pub fn prrlu_row_id(m: &Matrix, chi_max: usize, eps_id: f64) -> Result<InterpolativeFactor> {
    prrlu_row_id_counted(m, chi_max, eps_id, &mut OpCounter::new())
}

/// Stops when the largest Schur-complement entry is at most
/// `eps_id * |first pivot|`, when `chi_max` pivots are selected, or when the
/// complement vanishes.
pub fn prrlu_row_id_counted(
    m: &Matrix,
    chi_max: usize,
    eps_id: f64,
    ops: &mut OpCounter,
) -> Result<InterpolativeFactor> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows == 0 || cols == 0 {
        return Err(TtError::Shape("interpolative decomposition of an empty matrix".into()));
    }
    if chi_max == 0 {
        return Err(TtError::Config("chi_max must be at least 1".into()));
    }
    if !(eps_id >= 0.0) {
        return Err(TtError::Config(format!("eps_id must be nonnegative, got {eps_id}")));
    }
    if let Some(p) = m.as_slice().iter().position(|x| !x.is_finite()) {
        return Err(TtError::Domain(format!(
            "non-finite entry at ({}, {})",
            p / cols,
            p % cols
        )));
    }

    let mut w = m.as_slice().to_vec();
    let mut pivots = Vec::new();
    let mut col_pivots = Vec::new();
    // Columns of the lower factor, each of length `rows`.
    let mut lower: Vec<Vec<f64>> = Vec::new();
    let mut first_pivot = 0.0;
    let local_error;

    loop {
        let mut best = 0.0;
        let mut at = 0usize;
        for (p, &v) in w.iter().enumerate() {
            if v.abs() > best {
                best = v.abs();
                at = p;
            }
        }
        let t = pivots.len();
        if best == 0.0 {
            local_error = 0.0;
            break;
        }
        if t == 0 {
            first_pivot = best;
        } else if best <= eps_id * first_pivot {
            local_error = best;
            break;
        }
        if t == chi_max {
            local_error = best;
            break;
        }
        let (pi, pj) = (at / cols, at % cols);
        let piv = w[at];
        let col: Vec<f64> = (0..rows).map(|i| w[i * cols + pj] / piv).collect();
        let row: Vec<f64> = w[pi * cols..(pi + 1) * cols].to_vec();
        for (i, &ci) in col.iter().enumerate() {
            if ci == 0.0 {
                continue;
            }
            let wr = &mut w[i * cols..(i + 1) * cols];
            for (x, &r) in wr.iter_mut().zip(&row) {
                *x -= ci * r;
            }
        }
        ops.lu_step(rows, cols);
        for x in &mut w[pi * cols..(pi + 1) * cols] {
            *x = 0.0;
        }
        for i in 0..rows {
            w[i * cols + pj] = 0.0;
        }
        pivots.push(pi);
        col_pivots.push(pj);
        lower.push(col);
    }

    let r = pivots.len();
    // X = C L^{-1} with L = C[pivots, :] unit lower triangular. Solve the
    // row equations x L = c from the last unknown backwards.
    let mut x = Matrix::zeros(rows, r);
    for i in 0..rows {
        let xi = &mut x.as_mut_slice()[i * r..(i + 1) * r];
        for t in (0..r).rev() {
            let mut v = lower[t][i];
            for u in t + 1..r {
                v -= xi[u] * lower[t][pivots[u]];
            }
            xi[t] = v;
        }
    }
    ops.add((rows * r * r) as f64);
    for (t, &p) in pivots.iter().enumerate() {
        let xp = &mut x.as_mut_slice()[p * r..(p + 1) * r];
        xp.iter_mut().for_each(|v| *v = 0.0);
        xp[t] = 1.0;
    }
    let skeleton = m.select_rows(&pivots);
    Ok(InterpolativeFactor {
        x,
        pivots,
        col_pivots,
        skeleton,
        rank: r,
        local_error,
        first_pivot,
    })
}
