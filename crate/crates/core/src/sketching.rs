//! Random product-vector sketches of tensor-train tails.
//!
//! Site `j >= 2` gets a `k x d_j` Gaussian matrix. Applying it to the
//! physical index of core `j` gives a sketched core `(left, k, right)`, and
//! chaining sketched cores column by column (a Khatri-Rao product over the
//! sketch index) from the right gives the sketch matrices `S_j` of shape
//! `(left bond of site j) x k`, which compress all sites `j..n`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TtError};
use crate::linalg::{gemm, Matrix};
use crate::ops::OpCounter;
use crate::tt::TensorTrain;

/// First site that carries a sketch matrix.
pub const FIRST_SKETCHED_SITE: usize = 2;

/// Gaussian sketch matrices for sites `2..n`, one `k x d_j` matrix each.
///
/// Each site draws its rows from its own generator stream, so the matrices
/// for a sketch dimension `k` are the leading rows of those for any larger
/// dimension with the same seed.
pub fn make_omegas(phys_dims: &[usize], k: usize, seed: u64) -> Vec<Matrix> {
    make_omegas_stream(phys_dims, k, seed, 0)
}

/// Like [`make_omegas`], drawing from an independent family of streams.
pub fn make_omegas_stream(phys_dims: &[usize], k: usize, seed: u64, stream: u64) -> Vec<Matrix> {
    phys_dims
        .iter()
        .enumerate()
        .skip(FIRST_SKETCHED_SITE)
        .map(|(site, &d)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((stream << 32) | site as u64);
            Matrix::from_fn(k, d, |_, _| StandardNormal.sample(&mut rng))
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct SketchBundle {
    k: usize,
    omegas: Vec<Matrix>,
    /// Per site: `(left * k) x right`, row index `left`-major then sketch.
    sketched_cores: Vec<Matrix>,
    /// Per site: `left x k`.
    sketch_mats: Vec<Matrix>,
}

impl SketchBundle {
    pub fn new(tt: &TensorTrain, k: usize, seed: u64) -> Result<Self> {
        Self::from_omegas(tt, make_omegas(&tt.phys_dims(), k, seed))
    }

    pub fn from_omegas(tt: &TensorTrain, omegas: Vec<Matrix>) -> Result<Self> {
        Self::from_omegas_counted(tt, omegas, &mut OpCounter::new())
    }

    pub fn from_omegas_counted(
        tt: &TensorTrain,
        omegas: Vec<Matrix>,
        ops: &mut OpCounter,
    ) -> Result<Self> {
        let n = tt.order();
        let expected = n.saturating_sub(FIRST_SKETCHED_SITE);
        if omegas.len() != expected {
            return Err(TtError::Shape(format!(
                "order-{n} train needs {expected} sketch matrices, got {}",
                omegas.len()
            )));
        }
        let k = omegas.first().map_or(1, |o| o.rows());
        if k == 0 {
            return Err(TtError::Config("sketch dimension must be at least 1".into()));
        }
        for (i, o) in omegas.iter().enumerate() {
            let site = i + FIRST_SKETCHED_SITE;
            let d = tt.core(site).phys();
            if o.rows() != k || o.cols() != d {
                return Err(TtError::Shape(format!(
                    "sketch matrix for site {site} is {}x{}, expected {k}x{d}",
                    o.rows(),
                    o.cols()
                )));
            }
        }

        let mut sketched_cores = Vec::with_capacity(expected);
        for (i, o) in omegas.iter().enumerate() {
            let c = tt.core(i + FIRST_SKETCHED_SITE);
            let (l, d, r) = c.shape();
            let mut data = Vec::with_capacity(l * k * r);
            for a in 0..l {
                data.extend(gemm(o.as_slice(), k, d, &c.data()[a * d * r..(a + 1) * d * r], r));
            }
            ops.gemm(l * k, d, r);
            sketched_cores.push(Matrix::from_vec(l * k, r, data));
        }

        let mut sketch_mats: Vec<Matrix> = Vec::with_capacity(expected);
        for i in (0..expected).rev() {
            let sc = &sketched_cores[i];
            let r = sc.cols();
            let l = sc.rows() / k;
            let s = match sketch_mats.last() {
                None => Matrix::from_vec(l, k, sc.as_slice().to_vec()),
                Some(next) => {
                    let mut s = Matrix::zeros(l, k);
                    for a in 0..l {
                        for kappa in 0..k {
                            let row = sc.row(a * k + kappa);
                            let mut acc = 0.0;
                            for (b, &v) in row.iter().enumerate() {
                                acc += v * next.get(b, kappa);
                            }
                            s.set(a, kappa, acc);
                        }
                    }
                    ops.add(2.0 * (l * k * r) as f64);
                    s
                }
            };
            sketch_mats.push(s);
        }
        sketch_mats.reverse();

        Ok(Self {
            k,
            omegas,
            sketched_cores,
            sketch_mats,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn omegas(&self) -> &[Matrix] {
        &self.omegas
    }

    /// Sketch matrix covering sites `site..n`, for `site >= 2`.
    pub fn sketch_mat(&self, site: usize) -> &Matrix {
        &self.sketch_mats[site - FIRST_SKETCHED_SITE]
    }

    /// Sketched core of `site` as a `(left * k) x right` matrix.
    pub fn sketched_core(&self, site: usize) -> &Matrix {
        &self.sketched_cores[site - FIRST_SKETCHED_SITE]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn omega_shapes_and_determinism() {
        let a = make_omegas(&[2; 5], 7, 3);
        assert_eq!(a.len(), 3);
        assert!(a.iter().all(|m| m.rows() == 7 && m.cols() == 2));
        assert_eq!(a, make_omegas(&[2; 5], 7, 3));
        assert_ne!(a, make_omegas(&[2; 5], 7, 4));
        assert_ne!(a, make_omegas_stream(&[2; 5], 7, 3, 1));
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn smaller_sketches_are_leading_rows() {
        let small = make_omegas(&[3; 6], 4, 11);
        let large = make_omegas(&[3; 6], 9, 11);
        for (s, l) in small.iter().zip(&large) {
            assert_eq!(s, &l.leading_rows(4));
        }
    }

    #[test]
    fn omega_moments() {
        let o = make_omegas(&[1, 1, 10_000], 1, 99);
        let v = o[0].as_slice();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / v.len() as f64;
        assert!(mean.abs() < 0.05, "mean {mean}");
        assert!((var - 1.0).abs() < 0.1, "variance {var}");
    }

    #[test]
    fn all_ones_sketch_sums_the_tail() {
        let tt = TensorTrain::random(5, 2, 3, 1).unwrap();
        let omegas = vec![Matrix::from_vec(1, 2, vec![1.0, 1.0]); 3];
        let b = SketchBundle::from_omegas(&tt, omegas).unwrap();
        let s = b.sketch_mat(2);
        for alpha in 0..tt.core(1).right() {
            let mut want = 0.0;
            for s2 in 0..2 {
                for s3 in 0..2 {
                    for s4 in 0..2 {
                        let mut row = vec![0.0; tt.core(2).left()];
                        row[alpha] = 1.0;
                        for (c, s) in [(tt.core(2), s2), (tt.core(3), s3), (tt.core(4), s4)] {
                            let mut next = vec![0.0; c.right()];
                            for (a, ra) in row.iter().enumerate() {
                                for (b, nb) in next.iter_mut().enumerate() {
                                    *nb += ra * c.get(a, s, b);
                                }
                            }
                            row = next;
                        }
                        want += row[0];
                    }
                }
            }
            assert!((s.get(alpha, 0) - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn wrong_omega_count_is_rejected() {
        let tt = TensorTrain::random(4, 2, 2, 1).unwrap();
        let omegas = make_omegas(&[2; 5], 3, 0);
        assert!(matches!(
            SketchBundle::from_omegas(&tt, omegas),
            Err(TtError::Shape(_))
        ));
    }
}
