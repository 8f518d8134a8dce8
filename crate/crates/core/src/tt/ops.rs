use super::{Core, TensorTrain};
use crate::error::{Result, TtError};
use crate::linalg::{gemm, gemm_tn, qr_r_factor, Matrix};
use crate::ops::OpCounter;

fn check_same_shape(a: &TensorTrain, b: &TensorTrain) -> Result<()> {
    if a.phys_dims() != b.phys_dims() {
        return Err(TtError::Shape(format!(
            "physical dimensions differ: {:?} vs {:?}",
            a.phys_dims(),
            b.phys_dims()
        )));
    }
    Ok(())
}

/// Exact elementwise product by core-wise Kronecker products; bonds multiply.
pub fn hadamard_direct(a: &TensorTrain, b: &TensorTrain) -> Result<TensorTrain> {
    hadamard_direct_counted(a, b, &mut OpCounter::new())
}

pub fn hadamard_direct_counted(
    a: &TensorTrain,
    b: &TensorTrain,
    ops: &mut OpCounter,
) -> Result<TensorTrain> {
    check_same_shape(a, b)?;
    let cores = a
        .cores()
        .iter()
        .zip(b.cores())
        .map(|(ca, cb)| {
            let (la, d, ra) = ca.shape();
            let (lb, _, rb) = cb.shape();
            let (l, r) = (la * lb, ra * rb);
            let mut data = vec![0.0; l * d * r];
            for ia in 0..la {
                for ib in 0..lb {
                    let row = ia * lb + ib;
                    for s in 0..d {
                        let out = &mut data[(row * d + s) * r..(row * d + s + 1) * r];
                        let sa = &ca.data()[(ia * d + s) * ra..(ia * d + s + 1) * ra];
                        let sb = &cb.data()[(ib * d + s) * rb..(ib * d + s + 1) * rb];
                        for (ja, &x) in sa.iter().enumerate() {
                            for (jb, &y) in sb.iter().enumerate() {
                                out[ja * rb + jb] = x * y;
                            }
                        }
                    }
                }
            }
            ops.add((l * d * r) as f64);
            Core::new(l, d, r, data)
        })
        .collect::<Result<Vec<_>>>()?;
    TensorTrain::new(cores)
}

/// Sum over all multi-indices of `a(idx) * b(idx)`, by transfer matrices.
pub fn inner(a: &TensorTrain, b: &TensorTrain) -> Result<f64> {
    check_same_shape(a, b)?;
    // env is (chi_a x chi_b) on the current bond.
    let mut env = vec![1.0];
    for (ca, cb) in a.cores().iter().zip(b.cores()) {
        let (la, d, ra) = ca.shape();
        let (lb, _, rb) = cb.shape();
        // t[a, (s, b')] = sum_b env[a, b] B[b, s, b']
        let t = gemm(&env, la, lb, cb.data(), d * rb);
        // env'[a', b'] = sum_{a, s} A[(a, s), a'] t[(a, s), b']
        env = gemm_tn(ca.data(), la * d, ra, &t, rb);
    }
    Ok(env[0])
}

/// Frobenius norm from a left-to-right QR sweep. Unlike `inner(a, a).sqrt()`
/// this keeps full relative accuracy when the norm is tiny compared with the
/// sizes of the individual cores.
pub fn norm(tt: &TensorTrain) -> f64 {
    let mut r = Matrix::identity(1);
    for c in tt.cores() {
        let (_, d, right) = c.shape();
        let m = r.matmul(&c.right_unfolding());
        let rows = m.rows();
        r = qr_r_factor(&m.reshape(rows * d, right));
    }
    r.frobenius_norm()
}

/// `a - b` as a train with summed bonds.
pub fn sub(a: &TensorTrain, b: &TensorTrain) -> Result<TensorTrain> {
    check_same_shape(a, b)?;
    let n = a.order();
    let cores = (0..n)
        .map(|j| {
            let (ca, cb) = (a.core(j), b.core(j));
            let (la, d, ra) = ca.shape();
            let (lb, _, rb) = cb.shape();
            let l = if j == 0 { 1 } else { la + lb };
            let r = if j + 1 == n { 1 } else { ra + rb };
            let mut out = Core::zeros(l, d, r);
            let sign_b = if j == 0 { -1.0 } else { 1.0 };
            for s in 0..d {
                for x in 0..la {
                    for y in 0..ra {
                        out.set(x, s, y, ca.get(x, s, y));
                    }
                }
                let (lo, ro) = (
                    if j == 0 { 0 } else { la },
                    if j + 1 == n { 0 } else { ra },
                );
                for x in 0..lb {
                    for y in 0..rb {
                        out.set(lo + x, s, ro + y, sign_b * cb.get(x, s, y));
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    TensorTrain::new(cores)
}

/// `|truth - approx| / |truth|` in the Frobenius norm.
pub fn relative_error(approx: &TensorTrain, truth: &TensorTrain) -> Result<f64> {
    check_same_shape(approx, truth)?;
    let denom = norm(truth);
    if !(denom > 0.0) {
        return Err(TtError::Domain(
            "relative error is undefined for a zero reference".into(),
        ));
    }
    let diff = sub(approx, truth)?;
    Ok((norm(&diff) / denom).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn direct_product_of_rank_one() {
        let a = TensorTrain::rank_one(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = TensorTrain::rank_one(&[vec![-1.0, 0.5], vec![2.0, 2.0]]).unwrap();
        let c = hadamard_direct(&a, &b).unwrap();
        assert_eq!(c.bond_dims(), vec![1]);
        assert_eq!(c.core(0).data(), &[-1.0, 1.0]);
        assert_eq!(c.core(1).data(), &[6.0, 8.0]);
    }

    #[test]
    fn ones_is_value_identity() {
        let b = TensorTrain::random(4, 3, 2, 5).unwrap();
        let ones = TensorTrain::filled(&[3; 4], &[2, 2, 2], 1.0)
            .unwrap()
            .scaled(1.0 / 8.0);
        let c = hadamard_direct(&ones, &b).unwrap();
        assert_eq!(c.bond_dims(), vec![4, 4, 4]);
        for idx in [[0, 1, 2, 0], [2, 2, 2, 2], [1, 0, 1, 2]] {
            let want = b.eval(&idx).unwrap();
            assert!((c.eval(&idx).unwrap() - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn inner_of_unit_rank_one() {
        let a = TensorTrain::rank_one(&[vec![0.6, 0.8], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!((inner(&a, &a).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn sub_and_norm() {
        let a = TensorTrain::random(5, 2, 3, 1).unwrap();
        assert!(norm(&sub(&a, &a).unwrap()) <= 1e-13 * norm(&a));
        let err = relative_error(&a.scaled(2.0), &a).unwrap();
        assert!((err - 1.0).abs() < 1e-12);
        let nn = inner(&a, &a).unwrap().sqrt();
        assert!((norm(&a) - nn).abs() < 1e-12 * nn);
    }

    #[test]
    fn sub_of_order_two() {
        let a = TensorTrain::random(2, 3, 2, 2).unwrap();
        let b = TensorTrain::random(2, 3, 2, 3).unwrap();
        let d = sub(&a, &b).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = a.eval(&[i, j]).unwrap() - b.eval(&[i, j]).unwrap();
                assert!((d.eval(&[i, j]).unwrap() - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_reference_is_domain_error() {
        let z = TensorTrain::zeros(&[2, 2, 2]).unwrap();
        let a = TensorTrain::random(3, 2, 2, 1).unwrap();
        assert!(matches!(relative_error(&a, &z), Err(TtError::Domain(_))));
    }

    #[test]
    fn mismatched_shapes_are_rejected() {
        let a = TensorTrain::random(3, 2, 2, 1).unwrap();
        let b = TensorTrain::random(3, 3, 2, 1).unwrap();
        assert!(matches!(hadamard_direct(&a, &b), Err(TtError::Shape(_))));
        assert!(matches!(inner(&a, &b), Err(TtError::Shape(_))));
    }
}
