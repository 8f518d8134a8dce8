use super::{Core, TensorTrain};
use crate::error::{Result, TtError};
use crate::linalg::{gemm, thin_svd, truncation_rank, Matrix};

/// Largest dense tensor built without an explicit cap override.
pub const DEFAULT_DENSE_CAP: usize = 1 << 26;

/// Full tensor in row-major order (last index fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let size = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| TtError::Shape("dense shape overflows".into()))?;
        if shape.iter().any(|&d| d == 0) {
            return Err(TtError::Shape("dense dimensions must be positive".into()));
        }
        if size != values.len() {
            return Err(TtError::Shape(format!(
                "shape {shape:?} holds {size} values, got {}",
                values.len()
            )));
        }
        Ok(Self { shape, values })
    }

    /// Fills a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(shape: Vec<usize>, cap: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let size = checked_size(&shape, cap)?;
        let mut idx = vec![0usize; shape.len()];
        let mut values = Vec::with_capacity(size);
        for _ in 0..size {
            values.push(f(&idx));
            for j in (0..shape.len()).rev() {
                idx[j] += 1;
                if idx[j] < shape[j] {
                    break;
                }
                idx[j] = 0;
            }
        }
        Self::new(shape, values)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.values[self.linear_index(idx)]
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn checked_size(shape: &[usize], cap: usize) -> Result<usize> {
    let size = shape.iter().fold(1usize, |a, &d| a.saturating_mul(d));
    if size > cap {
        return Err(TtError::Capacity {
            requested: size,
            cap,
        });
    }
    Ok(size)
}

pub(super) fn to_dense(tt: &TensorTrain, cap: usize) -> Result<DenseTensor> {
    let shape = tt.phys_dims();
    checked_size(&shape, cap)?;
    // Running left contraction: rows are the visited multi-indices, columns
    // the open bond.
    let mut rows = 1usize;
    let mut acc = vec![1.0];
    let mut bond = 1usize;
    for c in tt.cores() {
        let next_rows = rows * c.phys();
        let interm = next_rows.saturating_mul(c.right());
        if interm > cap {
            return Err(TtError::Capacity {
                requested: interm,
                cap,
            });
        }
        acc = gemm(&acc, rows, bond, c.data(), c.phys() * c.right());
        rows = next_rows;
        bond = c.right();
    }
    DenseTensor::new(shape, acc)
}

/// Left-to-right TT-SVD. Each cut discards singular-value mass at most
/// `eps * |dense| / sqrt(n - 1)`, so the total relative error is at most
/// `eps` whenever `chi_max` does not bind.
pub(super) fn from_dense(dense: &DenseTensor, chi_max: usize, eps: f64) -> Result<TensorTrain> {
    if chi_max == 0 {
        return Err(TtError::Config("chi_max must be at least 1".into()));
    }
    if !(eps >= 0.0) {
        return Err(TtError::Config(format!("eps must be nonnegative, got {eps}")));
    }
    let shape = dense.shape();
    let n = shape.len();
    if n < 2 {
        return Err(TtError::Shape("tensor train needs order at least 2".into()));
    }
    if let Some(p) = dense.values().iter().position(|x| !x.is_finite()) {
        return Err(TtError::Domain(format!("non-finite dense entry at position {p}")));
    }
    let delta = eps * dense.frobenius_norm() / ((n - 1) as f64).sqrt();
    let mut cores = Vec::with_capacity(n);
    let mut left = 1usize;
    let mut rest = dense.values().len();
    let mut carry = dense.values().to_vec();
    for &d in shape.iter().take(n - 1) {
        rest /= d;
        let unfolding = Matrix::from_vec(left * d, rest, carry);
        let svd = thin_svd(&unfolding)?;
        let r = truncation_rank(&svd.s, chi_max, delta);
        cores.push(Core::new(left, d, r, svd.u.leading_cols(r).into_vec())?);
        let mut vt = svd.vt.leading_rows(r);
        vt.scale_rows(&svd.s[..r]);
        carry = vt.into_vec();
        left = r;
    }
    cores.push(Core::new(left, shape[n - 1], 1, carry)?);
    TensorTrain::new(cores)
}
