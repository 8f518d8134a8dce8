//! Tensor trains: chains of order-3 cores `(left, phys, right)`.

mod dense;
mod io;
mod ops;
mod round;

pub use dense::{DenseTensor, DEFAULT_DENSE_CAP};
pub use io::{read_json, to_json_string, from_json_str, write_json};
pub use ops::{hadamard_direct, hadamard_direct_counted, inner, norm, relative_error, sub};
pub use round::{round, round_counted, round_owned};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Result, TtError};
use crate::linalg::Matrix;

/// One order-3 core stored row-major with index order `(left, phys, right)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Core {
    left: usize,
    phys: usize,
    right: usize,
    data: Vec<f64>,
}

impl Core {
    pub fn new(left: usize, phys: usize, right: usize, data: Vec<f64>) -> Result<Self> {
        if left == 0 || phys == 0 || right == 0 {
            return Err(TtError::Shape(format!(
                "core dimensions must be positive, got ({left}, {phys}, {right})"
            )));
        }
        if data.len() != left * phys * right {
            return Err(TtError::Shape(format!(
                "core ({left}, {phys}, {right}) needs {} values, got {}",
                left * phys * right,
                data.len()
            )));
        }
        Ok(Self {
            left,
            phys,
            right,
            data,
        })
    }

    pub fn zeros(left: usize, phys: usize, right: usize) -> Self {
        Self {
            left,
            phys,
            right,
            data: vec![0.0; left * phys * right],
        }
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn phys(&self) -> usize {
        self.phys
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn shape(&self) -> (usize, usize, usize) {
        (self.left, self.phys, self.right)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, a: usize, s: usize, b: usize) -> f64 {
        self.data[(a * self.phys + s) * self.right + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, s: usize, b: usize, v: f64) {
        self.data[(a * self.phys + s) * self.right + b] = v;
    }

    /// Unfolding with rows `(left, phys)` and columns `right`.
    pub fn left_unfolding(&self) -> Matrix {
        Matrix::from_vec(self.left * self.phys, self.right, self.data.clone())
    }

    /// Unfolding with rows `left` and columns `(phys, right)`.
    pub fn right_unfolding(&self) -> Matrix {
        Matrix::from_vec(self.left, self.phys * self.right, self.data.clone())
    }

    /// Matrix slice for one physical index, `left x right`.
    pub fn slice(&self, s: usize) -> Matrix {
        Matrix::from_fn(self.left, self.right, |a, b| self.get(a, s, b))
    }

    pub fn from_left_unfolding(m: Matrix, phys: usize) -> Result<Self> {
        let (rows, right) = (m.rows(), m.cols());
        if phys == 0 || rows % phys != 0 {
            return Err(TtError::Shape(format!(
                "{rows} rows do not split into physical dimension {phys}"
            )));
        }
        Core::new(rows / phys, phys, right, m.into_vec())
    }

    pub fn from_right_unfolding(m: Matrix, phys: usize) -> Result<Self> {
        let (left, cols) = (m.rows(), m.cols());
        if phys == 0 || cols % phys != 0 {
            return Err(TtError::Shape(format!(
                "{cols} columns do not split into physical dimension {phys}"
            )));
        }
        Core::new(left, phys, cols / phys, m.into_vec())
    }
}

/// A tensor train of order `n >= 2` with unit boundary bonds.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorTrain {
    cores: Vec<Core>,
}

impl TensorTrain {
    pub fn new(cores: Vec<Core>) -> Result<Self> {
        let tt = Self { cores };
        tt.validate()?;
        Ok(tt)
    }

    /// Checks order, boundary bonds, and agreement of shared bonds.
    pub fn validate(&self) -> Result<()> {
        let n = self.cores.len();
        if n < 2 {
            return Err(TtError::Shape(format!(
                "a tensor train needs at least 2 cores, got {n}"
            )));
        }
        if self.cores[0].left != 1 || self.cores[n - 1].right != 1 {
            return Err(TtError::Shape(format!(
                "boundary bonds must be 1, got {} and {}",
                self.cores[0].left,
                self.cores[n - 1].right
            )));
        }
        for (j, c) in self.cores.iter().enumerate() {
            if c.left == 0 || c.phys == 0 || c.right == 0 {
                return Err(TtError::Shape(format!("core {j} has a zero dimension")));
            }
            if c.data.len() != c.left * c.phys * c.right {
                return Err(TtError::Shape(format!("core {j} has the wrong value count")));
            }
        }
        for j in 0..n - 1 {
            if self.cores[j].right != self.cores[j + 1].left {
                return Err(TtError::Shape(format!(
                    "bond {j}: core {j} has right dimension {} but core {} has left dimension {}",
                    self.cores[j].right,
                    j + 1,
                    self.cores[j + 1].left
                )));
            }
        }
        Ok(())
    }

    /// Builds a train from per-site vectors; every bond is 1.
    pub fn rank_one(vectors: &[Vec<f64>]) -> Result<Self> {
        let cores = vectors
            .iter()
            .map(|v| Core::new(1, v.len(), 1, v.clone()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Every core entry equal to `value`, with the given internal bonds.
    pub fn filled(phys_dims: &[usize], bond_dims: &[usize], value: f64) -> Result<Self> {
        if bond_dims.len() + 1 != phys_dims.len() {
            return Err(TtError::Shape(format!(
                "{} physical dimensions need {} bonds, got {}",
                phys_dims.len(),
                phys_dims.len().saturating_sub(1),
                bond_dims.len()
            )));
        }
        let n = phys_dims.len();
        let cores = (0..n)
            .map(|j| {
                let l = if j == 0 { 1 } else { bond_dims[j - 1] };
                let r = if j + 1 == n { 1 } else { bond_dims[j] };
                Core::new(l, phys_dims[j], r, vec![value; l * phys_dims[j] * r])
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    /// Rank-one train with every entry 1.
    pub fn ones(phys_dims: &[usize]) -> Result<Self> {
        Self::filled(phys_dims, &vec![1; phys_dims.len().saturating_sub(1)], 1.0)
    }

    /// Rank-one train with every entry 0.
    pub fn zeros(phys_dims: &[usize]) -> Result<Self> {
        Self::filled(phys_dims, &vec![1; phys_dims.len().saturating_sub(1)], 0.0)
    }

    /// Random train with standard normal entries and uniform dimensions.
    pub fn random(n: usize, d: usize, chi: usize, seed: u64) -> Result<Self> {
        if n < 2 || d == 0 || chi == 0 {
            return Err(TtError::Config(format!(
                "random tensor train needs n >= 2, d >= 1, chi >= 1 (got n={n}, d={d}, chi={chi})"
            )));
        }
        Self::random_with_dims(&vec![d; n], chi, seed)
    }

    /// Random train whose bond at each cut is `chi` capped by the largest
    /// rank the cut can support.
    pub fn random_with_dims(phys_dims: &[usize], chi: usize, seed: u64) -> Result<Self> {
        let bonds = capped_bonds(phys_dims, chi);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = phys_dims.len();
        if n < 2 {
            return Err(TtError::Config("random tensor train needs n >= 2".into()));
        }
        let cores = (0..n)
            .map(|j| {
                let l = if j == 0 { 1 } else { bonds[j - 1] };
                let r = if j + 1 == n { 1 } else { bonds[j] };
                let data = (0..l * phys_dims[j] * r)
                    .map(|_| StandardNormal.sample(&mut rng))
                    .collect();
                Core::new(l, phys_dims[j], r, data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(cores)
    }

    pub fn order(&self) -> usize {
        self.cores.len()
    }

    pub fn phys_dims(&self) -> Vec<usize> {
        self.cores.iter().map(|c| c.phys).collect()
    }

    /// Internal bonds `chi_1 .. chi_{n-1}`.
    pub fn bond_dims(&self) -> Vec<usize> {
        self.cores[..self.cores.len() - 1]
            .iter()
            .map(|c| c.right)
            .collect()
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    pub fn cores(&self) -> &[Core] {
        &self.cores
    }

    pub fn core(&self, j: usize) -> &Core {
        &self.cores[j]
    }

    pub fn into_cores(self) -> Vec<Core> {
        self.cores
    }

    /// Total number of stored parameters.
    pub fn num_params(&self) -> usize {
        self.cores.iter().map(|c| c.data.len()).sum()
    }

    /// Number of entries of the represented full tensor, saturating.
    pub fn full_size(&self) -> usize {
        self.cores
            .iter()
            .fold(1usize, |acc, c| acc.saturating_mul(c.phys))
    }

    pub fn eval(&self, idx: &[usize]) -> Result<f64> {
        if idx.len() != self.cores.len() {
            return Err(TtError::Index(format!(
                "multi-index has length {}, tensor has order {}",
                idx.len(),
                self.cores.len()
            )));
        }
        let mut row = vec![1.0];
        for (j, (c, &s)) in self.cores.iter().zip(idx).enumerate() {
            if s >= c.phys {
                return Err(TtError::Index(format!(
                    "index {s} at site {j} is out of range for dimension {}",
                    c.phys
                )));
            }
            let mut next = vec![0.0; c.right];
            for (a, &ra) in row.iter().enumerate() {
                if ra == 0.0 {
                    continue;
                }
                let base = (a * c.phys + s) * c.right;
                for (b, nb) in next.iter_mut().enumerate() {
                    *nb += ra * c.data[base + b];
                }
            }
            row = next;
        }
        Ok(row[0])
    }

    /// Multiplies every entry by `alpha` by scaling the first core.
    pub fn scaled(&self, alpha: f64) -> Self {
        let mut out = self.clone();
        out.cores[0].data.iter_mut().for_each(|x| *x *= alpha);
        out
    }

    /// Rescales so that the Frobenius norm is 1.
    pub fn normalize(&self) -> Result<Self> {
        let nrm = norm(self);
        if !(nrm > 0.0) || !nrm.is_finite() {
            return Err(TtError::Domain(format!(
                "cannot normalize a tensor train of norm {nrm}"
            )));
        }
        Ok(self.scaled(1.0 / nrm))
    }

    pub fn to_dense(&self) -> Result<DenseTensor> {
        dense::to_dense(self, DEFAULT_DENSE_CAP)
    }

    pub fn to_dense_with_cap(&self, cap: usize) -> Result<DenseTensor> {
        dense::to_dense(self, cap)
    }

    pub fn from_dense(dense: &DenseTensor, chi_max: usize, eps: f64) -> Result<Self> {
        dense::from_dense(dense, chi_max, eps)
    }

    /// Checks that every core entry is finite.
    pub fn check_finite(&self) -> Result<()> {
        for (j, c) in self.cores.iter().enumerate() {
            if let Some(pos) = c.data.iter().position(|x| !x.is_finite()) {
                let a = pos / (c.phys * c.right);
                let s = (pos / c.right) % c.phys;
                let b = pos % c.right;
                return Err(TtError::NonFinite {
                    site: j,
                    entry: vec![a, s, b],
                });
            }
        }
        Ok(())
    }

    /// Inserts `m` and its inverse on bond `j` (between cores `j` and
    /// `j + 1`). The represented tensor is unchanged up to rounding.
    pub fn gauge_bond(&self, j: usize, m: &Matrix, m_inv: &Matrix) -> Result<Self> {
        let chi = self.cores[j].right;
        if m.rows() != chi || m.cols() != chi || m_inv.rows() != chi || m_inv.cols() != chi {
            return Err(TtError::Shape(format!("gauge matrices must be {chi}x{chi}")));
        }
        let mut cores = self.cores.clone();
        let left = cores[j].left_unfolding().matmul(m);
        cores[j] = Core::from_left_unfolding(left, self.cores[j].phys)?;
        let right = m_inv.matmul(&cores[j + 1].right_unfolding());
        cores[j + 1] = Core::from_right_unfolding(right, self.cores[j + 1].phys)?;
        Self::new(cores)
    }
}

/// Bond at each cut: `min(chi, prod of dims left of the cut, prod right)`.
pub fn capped_bonds(phys_dims: &[usize], chi: usize) -> Vec<usize> {
    let n = phys_dims.len();
    (1..n)
        .map(|cut| {
            let left = phys_dims[..cut]
                .iter()
                .fold(1usize, |a, &d| a.saturating_mul(d));
            let right = phys_dims[cut..]
                .iter()
                .fold(1usize, |a, &d| a.saturating_mul(d));
            chi.min(left).min(right)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_ones_eval_is_product_of_bonds() {
        let tt = TensorTrain::filled(&[2, 3, 2, 2], &[2, 3, 4], 1.0).unwrap();
        assert_eq!(tt.eval(&[1, 2, 0, 1]).unwrap(), 24.0);
        assert_eq!(tt.eval(&[0, 0, 0, 0]).unwrap(), 24.0);
    }

    #[test]
    fn rank_one_eval_is_product_of_entries() {
        let tt = TensorTrain::rank_one(&[vec![1.0, 2.0], vec![3.0, -1.0, 0.5], vec![4.0, 5.0]])
            .unwrap();
        assert_eq!(tt.eval(&[1, 2, 0]).unwrap(), 2.0 * 0.5 * 4.0);
    }

    #[test]
    fn eval_rejects_bad_indices() {
        let tt = TensorTrain::random(3, 2, 2, 1).unwrap();
        assert!(matches!(tt.eval(&[0, 2, 0]), Err(TtError::Index(_))));
        assert!(matches!(tt.eval(&[0, 0]), Err(TtError::Index(_))));
    }

    #[test]
    fn validator_rejects_mismatched_bonds() {
        let a = Core::zeros(1, 2, 3);
        let b = Core::zeros(2, 2, 1);
        assert!(matches!(TensorTrain::new(vec![a, b]), Err(TtError::Shape(_))));
        let lone = Core::zeros(1, 2, 1);
        assert!(TensorTrain::new(vec![lone]).is_err());
        let open = Core::zeros(2, 2, 1);
        assert!(TensorTrain::new(vec![Core::zeros(1, 2, 1), open]).is_err());
    }

    #[test]
    fn random_is_deterministic_and_capped() {
        let a = TensorTrain::random(6, 2, 3, 7).unwrap();
        let b = TensorTrain::random(6, 2, 3, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bond_dims(), vec![2, 3, 3, 3, 2]);
        let c = TensorTrain::random(2, 2, 5, 0).unwrap();
        assert_eq!(c.bond_dims(), vec![2]);
        let d = TensorTrain::random(6, 2, 3, 8).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn normalize_all_ones() {
        let tt = TensorTrain::ones(&[2, 2, 2, 2]).unwrap();
        assert!((inner(&tt, &tt).unwrap() - 16.0).abs() < 1e-14);
        let u = tt.normalize().unwrap();
        assert!((inner(&u, &u).unwrap() - 1.0).abs() < 1e-14);
        let z = TensorTrain::zeros(&[2, 2]).unwrap();
        assert!(matches!(z.normalize(), Err(TtError::Domain(_))));
    }

    #[test]
    fn normalize_keeps_unit_train() {
        let tt = TensorTrain::rank_one(&[vec![0.6, 0.8], vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let u = tt.normalize().unwrap();
        for (x, y) in u.cores()[0].data().iter().zip(tt.cores()[0].data()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn check_finite_reports_position() {
        let mut cores = TensorTrain::random(3, 2, 2, 3).unwrap().into_cores();
        cores[1].set(1, 0, 1, f64::NAN);
        let tt = TensorTrain::new(cores).unwrap();
        match tt.check_finite() {
            Err(TtError::NonFinite { site, entry }) => {
                assert_eq!(site, 1);
                assert_eq!(entry, vec![1, 0, 1]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
