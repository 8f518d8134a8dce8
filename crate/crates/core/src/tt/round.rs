use super::{Core, TensorTrain};
use crate::error::{Result, TtError};
use crate::linalg::{thin_qr, thin_svd, truncation_rank};
use crate::ops::OpCounter;

/// Recompresses a train: right-to-left orthogonalization, then a
/// left-to-right truncated SVD sweep. Each bond keeps at most `chi_max`
/// singular values and drops tail mass up to `eps` times the norm.
pub fn round(tt: &TensorTrain, chi_max: usize, eps: f64) -> Result<TensorTrain> {
    round_counted(tt, chi_max, eps, &mut OpCounter::new())
}

pub fn round_counted(
    tt: &TensorTrain,
    chi_max: usize,
    eps: f64,
    ops: &mut OpCounter,
) -> Result<TensorTrain> {
    round_owned(tt.clone(), chi_max, eps, ops)
}

/// Like [`round_counted`], reusing the input's storage.
pub fn round_owned(
    tt: TensorTrain,
    chi_max: usize,
    eps: f64,
    ops: &mut OpCounter,
) -> Result<TensorTrain> {
    if chi_max == 0 {
        return Err(TtError::Config("chi_max must be at least 1".into()));
    }
    if !(eps >= 0.0) {
        return Err(TtError::Config(format!("eps must be nonnegative, got {eps}")));
    }
    let n = tt.order();
    let mut cores: Vec<Core> = tt.into_cores();

    for j in (1..n).rev() {
        let (l, d, r) = cores[j].shape();
        let mt = cores[j].right_unfolding().transpose();
        let (q, rf) = thin_qr(&mt);
        ops.qr(d * r, l);
        let p = q.cols();
        cores[j] = Core::from_right_unfolding(q.transpose(), d)?;
        let (lp, dp, _) = cores[j - 1].shape();
        let prev = cores[j - 1].left_unfolding().matmul(&rf.transpose());
        ops.gemm(lp * dp, l, p);
        cores[j - 1] = Core::from_left_unfolding(prev, dp)?;
    }

    for j in 0..n - 1 {
        let (l, d, r) = cores[j].shape();
        let svd = thin_svd(&cores[j].left_unfolding())?;
        ops.svd(l * d, r);
        let total = svd.s.iter().map(|x| x * x).sum::<f64>().sqrt();
        let k = truncation_rank(&svd.s, chi_max, eps * total);
        cores[j] = Core::from_left_unfolding(svd.u.leading_cols(k), d)?;
        let mut carry = svd.vt.leading_rows(k);
        carry.scale_rows(&svd.s[..k]);
        let (_, dn, rn) = cores[j + 1].shape();
        let next = carry.matmul(&cores[j + 1].right_unfolding());
        ops.gemm(k, r, dn * rn);
        cores[j + 1] = Core::from_right_unfolding(next, dn)?;
    }
    TensorTrain::new(cores)
}
