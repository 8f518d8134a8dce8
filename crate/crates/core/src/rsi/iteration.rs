use crate::error::{Result, TtError};
use crate::linalg::{gemm, Matrix};
use crate::matrix_id::{prrlu_row_id_counted, InterpolativeFactor};
use crate::ops::OpCounter;
use crate::sketching::SketchBundle;
use crate::tt::{Core, TensorTrain};

use super::RsiConfig;

/// How the per-input tensors are merged into the tensor being interpolated.
#[derive(Clone, Copy)]
pub enum Combine<'a> {
    /// Elementwise product of all inputs.
    Product,
    /// Elementwise map of a single input.
    Unary(&'a (dyn Fn(f64) -> f64 + Sync)),
    /// Elementwise function of all inputs, called with one value per input.
    Nary(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
}

impl std::fmt::Debug for Combine<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Combine::Product => f.write_str("Product"),
            Combine::Unary(_) => f.write_str("Unary(..)"),
            Combine::Nary(_) => f.write_str("Nary(..)"),
        }
    }
}

impl Combine<'_> {
    pub(crate) fn check_arity(&self, inputs: usize) -> Result<()> {
        match self {
            Combine::Unary(_) if inputs != 1 => Err(TtError::Config(format!(
                "a unary map takes exactly one input, got {inputs}"
            ))),
            _ if inputs == 0 => Err(TtError::Config("at least one input is required".into())),
            _ => Ok(()),
        }
    }

    /// Value of the combination when every input entry is zero.
    pub(crate) fn at_zero(&self, inputs: usize) -> f64 {
        match self {
            Combine::Product => 0.0,
            Combine::Unary(f) => f(0.0),
            Combine::Nary(f) => f(&vec![0.0; inputs]),
        }
    }

    /// Merges same-shaped matrices entrywise.
    pub(crate) fn apply(&self, mats: &[Matrix], site: usize, ops: &mut OpCounter) -> Result<Matrix> {
        let (rows, cols) = (mats[0].rows(), mats[0].cols());
        let len = rows * cols;
        let out: Vec<f64> = match self {
            Combine::Product => {
                let mut acc = mats[0].as_slice().to_vec();
                for m in &mats[1..] {
                    acc.iter_mut().zip(m.as_slice()).for_each(|(a, b)| *a *= b);
                }
                ops.add((len * (mats.len() - 1)) as f64);
                acc
            }
            Combine::Unary(f) => mats[0].as_slice().iter().map(|&x| f(x)).collect(),
            Combine::Nary(f) => {
                let mut buf = vec![0.0; mats.len()];
                (0..len)
                    .map(|p| {
                        for (b, m) in buf.iter_mut().zip(mats) {
                            *b = m.as_slice()[p];
                        }
                        f(&buf)
                    })
                    .collect()
            }
        };
        if let Some(p) = out.iter().position(|x| !x.is_finite()) {
            return Err(TtError::Domain(format!(
                "combined value is not finite at site {site}, row {}, column {}",
                p / cols,
                p % cols
            )));
        }
        Ok(Matrix::from_vec(rows, cols, out))
    }
}

/// Result of one sketched step.
#[derive(Debug)]
pub struct IterationOutput {
    /// Interpolation core for the step's site, `(prev rank, d, rank)`.
    pub core: Core,
    pub factor: InterpolativeFactor,
    /// Inputs' cores at the next site, restricted to the selected rows.
    pub heads: Vec<Core>,
    /// Row and column counts of the matricization that was factored.
    pub shape: (usize, usize),
}

/// One sketched step at `site`. `heads[i]` is input `i`'s core at `site`
/// already restricted to the previous pivots, so all heads share their
/// left dimension. The step sketches sites `site + 2..n`, combines the
/// sketched inputs, selects rows by a row ID, and slices the next cores.
pub fn rsi_iteration(
    heads: &[Core],
    inputs: &[TensorTrain],
    bundles: &[SketchBundle],
    site: usize,
    combine: &Combine<'_>,
    cfg: &RsiConfig,
    ops: &mut OpCounter,
) -> Result<IterationOutput> {
    let n = inputs[0].order();
    if site + 2 >= n {
        return Err(TtError::Index(format!(
            "a sketched step needs two sites to its right, site {site} of {n}"
        )));
    }
    let (g, d, _) = heads[0].shape();
    let dn = inputs[0].core(site + 1).phys();
    let k = bundles[0].k();
    let mut sketched = Vec::with_capacity(inputs.len());
    for ((head, tt), bundle) in heads.iter().zip(inputs).zip(bundles) {
        if head.left() != g || head.phys() != d {
            return Err(TtError::Shape(format!(
                "heads disagree at site {site}: ({}, {}) vs ({g}, {d})",
                head.left(),
                head.phys()
            )));
        }
        let next = tt.core(site + 1);
        let (chi, _, chi_next) = next.shape();
        if head.right() != chi {
            return Err(TtError::Shape(format!(
                "head at site {site} has right bond {} but the next core expects {chi}",
                head.right()
            )));
        }
        let s = bundle.sketch_mat(site + 2);
        // (chi, dn * k): next core with its right bond sketched.
        let w = gemm(next.data(), chi * dn, chi_next, s.as_slice(), k);
        ops.gemm(chi * dn, chi_next, k);
        let t = gemm(head.data(), g * d, chi, &w, dn * k);
        ops.gemm(g * d, chi, dn * k);
        sketched.push(Matrix::from_vec(g * d, dn * k, t));
    }
    let merged = combine.apply(&sketched, site, ops)?;
    drop(sketched);
    let factor = prrlu_row_id_counted(&merged, cfg.chi_max, cfg.eps_id, ops)?;
    if factor.rank == 0 {
        return Err(TtError::DegenerateSketch { site, attempts: 1 });
    }
    let r = factor.rank;
    let core = Core::new(g, d, r, factor.x.as_slice().to_vec())?;
    let heads = reinterpolate(heads, inputs, site, &factor.pivots, ops)?;
    Ok(IterationOutput {
        core,
        factor,
        heads,
        shape: (merged.rows(), merged.cols()),
    })
}

/// Restricts each head to the pivot rows and contracts with the next core.
fn reinterpolate(
    heads: &[Core],
    inputs: &[TensorTrain],
    site: usize,
    pivots: &[usize],
    ops: &mut OpCounter,
) -> Result<Vec<Core>> {
    heads
        .iter()
        .zip(inputs)
        .map(|(head, tt)| {
            let rows = head.left_unfolding().select_rows(pivots);
            let next = tt.core(site + 1);
            let (chi, dn, chi_next) = next.shape();
            let data = gemm(rows.as_slice(), pivots.len(), chi, next.data(), dn * chi_next);
            ops.gemm(pivots.len(), chi, dn * chi_next);
            Core::new(pivots.len(), dn, chi_next, data)
        })
        .collect()
}

/// Result of interpolating the exact remaining tensor from `site` to the end.
#[derive(Debug)]
pub struct DenseTailOutput {
    /// Cores for sites `site..n`; the last is the final skeleton.
    pub cores: Vec<Core>,
    /// One factor per site `site..n-1`.
    pub factors: Vec<InterpolativeFactor>,
    /// Matricization shapes, one per factor.
    pub shapes: Vec<(usize, usize)>,
    /// Set when the remaining tensor is exactly zero.
    pub vanished: bool,
}

/// Contracts every head with all remaining cores, combines the exact values,
/// and produces the remaining cores by successive row IDs. The skeleton of
/// the last ID holds exact entries and becomes the final core.
pub fn dense_tail(
    heads: &[Core],
    inputs: &[TensorTrain],
    site: usize,
    combine: &Combine<'_>,
    cfg: &RsiConfig,
    ops: &mut OpCounter,
) -> Result<DenseTailOutput> {
    let n = inputs[0].order();
    let phys = inputs[0].phys_dims();
    let (g, d, _) = heads[0].shape();
    let cols: usize = phys[site + 1..].iter().product();
    let mut exact = Vec::with_capacity(inputs.len());
    for (head, tt) in heads.iter().zip(inputs) {
        let mut acc = head.data().to_vec();
        let mut rows = g * d;
        let mut bond = head.right();
        for u in site + 1..n {
            let c = tt.core(u);
            acc = gemm(&acc, rows, bond, c.data(), c.phys() * c.right());
            ops.gemm(rows, bond, c.phys() * c.right());
            rows *= c.phys();
            bond = c.right();
        }
        exact.push(Matrix::from_vec(g * d, cols, acc));
    }
    let mut cur = combine.apply(&exact, site, ops)?;
    drop(exact);

    let mut cores = Vec::new();
    let mut factors = Vec::new();
    let mut shapes = Vec::new();
    let mut left = g;
    for u in site..n - 1 {
        let f = prrlu_row_id_counted(&cur, cfg.chi_max, cfg.eps_id, ops)?;
        shapes.push((cur.rows(), cur.cols()));
        if f.rank == 0 {
            return Ok(DenseTailOutput {
                cores: Vec::new(),
                factors,
                shapes,
                vanished: true,
            });
        }
        let r = f.rank;
        cores.push(Core::new(left, phys[u], r, f.x.as_slice().to_vec())?);
        let rest = f.skeleton.cols();
        cur = f.skeleton.clone().reshape(r * phys[u + 1], rest / phys[u + 1]);
        factors.push(f);
        left = r;
    }
    cores.push(Core::new(left, phys[n - 1], 1, cur.into_vec())?);
    Ok(DenseTailOutput {
        cores,
        factors,
        shapes,
        vanished: false,
    })
}
