//! Hadamard products by site-by-site interpolative decompositions of randomly sketched unfoldings.
//!
//! Builds the output train site by site from left to right. Each step
//! sketches the inputs' tails with random product vectors, combines the
//! sketched inputs entrywise, picks rows with an interpolative
//! decomposition, and restricts the inputs to those rows. No step ever
//! forms a bond larger than `max(chi_max, input bonds)`. Once the unsketched
//! tail is no larger than the sketch, the remaining sites are interpolated
//! from the exact tail and the last skeleton becomes the final core.

mod iteration;

pub use iteration::{dense_tail, rsi_iteration, Combine, DenseTailOutput, IterationOutput};

use std::time::Instant;

use crate::error::{Result, TtError};
use crate::linalg::Matrix;
use crate::matrix_id::InterpolativeFactor;
use crate::ops::OpCounter;
use crate::sketching::{make_omegas, make_omegas_stream, SketchBundle};
use crate::tt::{Core, TensorTrain};

#[derive(Clone, Debug, PartialEq)]
pub struct RsiConfig {
    /// Largest bond of the output.
    pub chi_max: usize,
    /// Pivoting stops once the remainder is below `eps_id` times the first pivot.
    pub eps_id: f64,
    /// Extra sketch columns beyond `ceil(chi_max / d)`.
    pub oversample: usize,
    pub seed: u64,
    /// Interpolate the exact tail once it is no larger than the sketch.
    pub skip_sketch_auto: bool,
    /// Use the same sketch matrices for every input.
    pub share_omegas: bool,
    /// Fresh seeds tried after a sketch collapses to rank zero.
    pub max_reseeds: usize,
}

impl RsiConfig {
    pub fn new(chi_max: usize) -> Self {
        Self {
            chi_max,
            eps_id: f64::EPSILON,
            oversample: 5,
            seed: 0,
            skip_sketch_auto: true,
            share_omegas: true,
            max_reseeds: 2,
        }
    }

    pub fn with_eps_id(mut self, eps_id: f64) -> Self {
        self.eps_id = eps_id;
        self
    }

    pub fn with_oversample(mut self, p: usize) -> Self {
        self.oversample = p;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.chi_max == 0 {
            return Err(TtError::Config("chi_max must be at least 1".into()));
        }
        if !(self.eps_id >= 0.0) || !self.eps_id.is_finite() {
            return Err(TtError::Config(format!(
                "eps_id must be finite and nonnegative, got {}",
                self.eps_id
            )));
        }
        Ok(())
    }

    /// `ceil(chi_max / d) + oversample` with `d` the largest physical dimension.
    pub fn sketch_dim(&self, phys_dims: &[usize]) -> usize {
        let d = phys_dims.iter().copied().max().unwrap_or(1).max(1);
        self.chi_max.div_ceil(d) + self.oversample
    }
}

/// Pivots selected at one step.
#[derive(Clone, Debug, PartialEq)]
pub struct PivotSet {
    /// Row indices into the step's matricization (previous pivot major,
    /// then physical index).
    pub rows: Vec<usize>,
    /// The same pivots as multi-indices over sites `0..=step`.
    pub multi: Vec<Vec<usize>>,
}

/// Pivot sets for output bonds `0..n-1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PivotTrail {
    pub sets: Vec<PivotSet>,
}

impl PivotTrail {
    fn push(&mut self, rows: &[usize], d: usize) {
        let multi = rows
            .iter()
            .map(|&row| {
                let (a, s) = (row / d, row % d);
                let mut m = self.sets.last().map_or_else(Vec::new, |p| p.multi[a].clone());
                m.push(s);
                m
            })
            .collect();
        self.sets.push(PivotSet {
            rows: rows.to_vec(),
            multi,
        });
    }

    /// Every pivot of step `j` extends some pivot of step `j - 1`, and
    /// multi-indices within a step are distinct.
    pub fn validate_nesting(&self) -> Result<()> {
        for (j, set) in self.sets.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            for m in &set.multi {
                if m.len() != j + 1 {
                    return Err(TtError::Index(format!(
                        "pivot {m:?} at step {j} should have length {}",
                        j + 1
                    )));
                }
                if !seen.insert(m.clone()) {
                    return Err(TtError::Index(format!("duplicate pivot {m:?} at step {j}")));
                }
                if j > 0 && !self.sets[j - 1].multi.iter().any(|p| p[..] == m[..j]) {
                    return Err(TtError::Index(format!(
                        "pivot {m:?} at step {j} does not extend a pivot of step {}",
                        j - 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(|s| s.rows.len()).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationStats {
    pub site: usize,
    pub rank: usize,
    pub local_error: f64,
    pub first_pivot: f64,
    /// Whether the step worked on sketched columns (otherwise exact ones).
    pub sketched: bool,
    /// Rows and columns of the factored matricization.
    pub shape: (usize, usize),
}

/// Events that suggest the output may be less accurate than requested.
#[derive(Clone, Debug, PartialEq)]
pub enum RankDiagnostic {
    /// Every sketch column was used as a pivot, so the sketch may have been
    /// too narrow to reveal the rank.
    SketchSaturated { site: usize, rank: usize },
    /// The rank cap stopped pivoting above the tolerance.
    RankCapped { site: usize, rank: usize, local_error: f64 },
    /// A sketch collapsed and the run restarted with a new seed.
    Reseeded { site: usize, attempt: usize, seed: u64 },
}

#[derive(Clone, Debug)]
pub struct RsiReport {
    pub output: TensorTrain,
    pub trail: PivotTrail,
    pub iterations: Vec<IterationStats>,
    pub diagnostics: Vec<RankDiagnostic>,
    pub k: usize,
    /// Seed of the successful attempt.
    pub seed_used: u64,
    pub sketch_ns: u64,
    pub iter_ns: u64,
    pub flops: f64,
    /// Largest bond dimension of any intermediate core.
    pub max_intermediate_bond: usize,
    /// The combined tensor was exactly zero and the output is the zero train.
    pub zero_output: bool,
}

impl RsiReport {
    pub fn rank_deficiency_flagged(&self) -> bool {
        !self.diagnostics.is_empty()
    }
}

/// Elementwise product of two or more trains.
pub fn rsi_hadamard(inputs: &[TensorTrain], cfg: &RsiConfig) -> Result<RsiReport> {
    if inputs.len() < 2 {
        return Err(TtError::Config(format!(
            "a product needs at least two inputs, got {}",
            inputs.len()
        )));
    }
    rsi_apply(inputs, Combine::Product, cfg)
}

/// Elementwise map `f` of one train.
pub fn rsi_map(input: &TensorTrain, f: &(dyn Fn(f64) -> f64 + Sync), cfg: &RsiConfig) -> Result<RsiReport> {
    rsi_apply(std::slice::from_ref(input), Combine::Unary(f), cfg)
}

/// General entry point: interpolates `combine` applied entrywise to the inputs.
pub fn rsi_apply(inputs: &[TensorTrain], combine: Combine<'_>, cfg: &RsiConfig) -> Result<RsiReport> {
    run(inputs, combine, cfg, None)
}

/// Like [`rsi_apply`] with caller-supplied sketch matrices: either one list
/// shared by all inputs or one list per input, each holding a `k x d_j`
/// matrix for every site `j >= 2`.
pub fn rsi_apply_with_omegas(
    inputs: &[TensorTrain],
    combine: Combine<'_>,
    cfg: &RsiConfig,
    omegas: &[Vec<Matrix>],
) -> Result<RsiReport> {
    if omegas.len() != 1 && omegas.len() != inputs.len() {
        return Err(TtError::Config(format!(
            "need one shared sketch list or one per input, got {} for {} inputs",
            omegas.len(),
            inputs.len()
        )));
    }
    run(inputs, combine, cfg, Some(omegas))
}

fn reseed(seed: u64, attempt: usize) -> u64 {
    seed.wrapping_add((attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn run(
    inputs: &[TensorTrain],
    combine: Combine<'_>,
    cfg: &RsiConfig,
    omegas: Option<&[Vec<Matrix>]>,
) -> Result<RsiReport> {
    cfg.validate()?;
    combine.check_arity(inputs.len())?;
    let phys = inputs[0].phys_dims();
    for (i, tt) in inputs.iter().enumerate() {
        if tt.phys_dims() != phys {
            return Err(TtError::Shape(format!(
                "input {i} has physical dimensions {:?}, expected {phys:?}",
                tt.phys_dims()
            )));
        }
        tt.check_finite()?;
    }

    if combined_is_zero(inputs, &combine) {
        return Ok(zero_report(&phys, cfg.sketch_dim(&phys), cfg.seed));
    }

    let mut diagnostics = Vec::new();
    let attempts = if omegas.is_some() { 0 } else { cfg.max_reseeds };
    for attempt in 0..=attempts {
        let seed = reseed(cfg.seed, attempt);
        match run_once(inputs, &combine, cfg, omegas, seed) {
            Err(TtError::DegenerateSketch { site, .. }) => {
                if attempt == attempts {
                    return Err(TtError::DegenerateSketch {
                        site,
                        attempts: attempt + 1,
                    });
                }
                diagnostics.push(RankDiagnostic::Reseeded {
                    site,
                    attempt: attempt + 1,
                    seed: reseed(cfg.seed, attempt + 1),
                });
            }
            Err(e) => return Err(e),
            Ok(mut report) => {
                diagnostics.append(&mut report.diagnostics);
                report.diagnostics = diagnostics;
                return Ok(report);
            }
        }
    }
    unreachable!("the final attempt always returns")
}

fn combined_is_zero(inputs: &[TensorTrain], combine: &Combine<'_>) -> bool {
    let zero: Vec<bool> = inputs.iter().map(|t| crate::tt::norm(t) == 0.0).collect();
    match combine {
        Combine::Product => zero.iter().any(|&z| z),
        _ => zero.iter().all(|&z| z) && combine.at_zero(inputs.len()) == 0.0,
    }
}

fn zero_report(phys: &[usize], k: usize, seed: u64) -> RsiReport {
    RsiReport {
        output: TensorTrain::zeros(phys).expect("valid dimensions"),
        trail: PivotTrail::default(),
        iterations: Vec::new(),
        diagnostics: Vec::new(),
        k,
        seed_used: seed,
        sketch_ns: 0,
        iter_ns: 0,
        flops: 0.0,
        max_intermediate_bond: 1,
        zero_output: true,
    }
}

fn run_once(
    inputs: &[TensorTrain],
    combine: &Combine<'_>,
    cfg: &RsiConfig,
    omegas: Option<&[Vec<Matrix>]>,
    seed: u64,
) -> Result<RsiReport> {
    let phys = inputs[0].phys_dims();
    let n = phys.len();
    let mut ops = OpCounter::new();

    let sketch_start = Instant::now();
    let bundles: Vec<SketchBundle> = if n > 2 {
        let lists: Vec<Vec<Matrix>> = match omegas {
            Some(o) if o.len() == 1 => vec![o[0].clone(); inputs.len()],
            Some(o) => o.to_vec(),
            None => {
                let k = cfg.sketch_dim(&phys);
                if cfg.share_omegas {
                    vec![make_omegas(&phys, k, seed); inputs.len()]
                } else {
                    (0..inputs.len())
                        .map(|i| make_omegas_stream(&phys, k, seed, i as u64))
                        .collect()
                }
            }
        };
        inputs
            .iter()
            .zip(lists)
            .map(|(tt, o)| SketchBundle::from_omegas_counted(tt, o, &mut ops))
            .collect::<Result<_>>()?
    } else {
        Vec::new()
    };
    let sketch_ns = sketch_start.elapsed().as_nanos() as u64;
    let k = bundles.first().map_or_else(|| cfg.sketch_dim(&phys), |b| b.k());
    if bundles.iter().any(|b| b.k() != k) {
        return Err(TtError::Shape("all sketch lists must share one sketch dimension".into()));
    }

    let iter_start = Instant::now();
    let mut heads: Vec<Core> = inputs.iter().map(|t| t.core(0).clone()).collect();
    let mut cores = Vec::with_capacity(n);
    let mut trail = PivotTrail::default();
    let mut iterations = Vec::new();
    let mut diagnostics = Vec::new();
    let mut max_bond = heads.iter().map(|h| h.right()).max().unwrap_or(1);
    let mut site = 0;
    while site + 2 < n {
        let tail: usize = phys[site + 2..]
            .iter()
            .fold(1usize, |a, &d| a.saturating_mul(d));
        if cfg.skip_sketch_auto && tail <= k {
            break;
        }
        let out = rsi_iteration(&heads, inputs, &bundles, site, combine, cfg, &mut ops)?;
        let f = &out.factor;
        let sketch_cols = out.shape.1;
        if f.rank == sketch_cols && f.rank < out.shape.0 && f.rank < cfg.chi_max {
            diagnostics.push(RankDiagnostic::SketchSaturated { site, rank: f.rank });
        }
        note_factor(f, site, true, out.shape, cfg, &mut iterations, &mut diagnostics);
        trail.push(&f.pivots, phys[site]);
        max_bond = max_bond.max(f.rank);
        max_bond = out
            .heads
            .iter()
            .fold(max_bond, |m, h| m.max(h.left()).max(h.right()));
        cores.push(out.core);
        heads = out.heads;
        site += 1;
    }

    let tail = dense_tail(&heads, inputs, site, combine, cfg, &mut ops)?;
    if tail.vanished {
        let mut report = zero_report(&phys, k, seed);
        report.sketch_ns = sketch_ns;
        report.iter_ns = iter_start.elapsed().as_nanos() as u64;
        report.flops = ops.flops();
        return Ok(report);
    }
    for (u, (f, shape)) in tail.factors.iter().zip(&tail.shapes).enumerate() {
        note_factor(f, site + u, false, *shape, cfg, &mut iterations, &mut diagnostics);
        trail.push(&f.pivots, phys[site + u]);
        max_bond = max_bond.max(f.rank);
    }
    cores.extend(tail.cores);
    let iter_ns = iter_start.elapsed().as_nanos() as u64;

    let output = TensorTrain::new(cores)?;
    debug_assert_eq!(output.bond_dims(), trail.sizes());
    Ok(RsiReport {
        output,
        trail,
        iterations,
        diagnostics,
        k,
        seed_used: seed,
        sketch_ns,
        iter_ns,
        flops: ops.flops(),
        max_intermediate_bond: max_bond,
        zero_output: false,
    })
}

fn note_factor(
    f: &InterpolativeFactor,
    site: usize,
    sketched: bool,
    shape: (usize, usize),
    cfg: &RsiConfig,
    iterations: &mut Vec<IterationStats>,
    diagnostics: &mut Vec<RankDiagnostic>,
) {
    if f.rank_capped(cfg.chi_max, cfg.eps_id) {
        diagnostics.push(RankDiagnostic::RankCapped {
            site,
            rank: f.rank,
            local_error: f.local_error,
        });
    }
    iterations.push(IterationStats {
        site,
        rank: f.rank,
        local_error: f.local_error,
        first_pivot: f.first_pivot,
        sketched,
        shape,
    });
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::{hadamard_direct, relative_error};

    #[test]
    fn sketch_dim_uses_ceiling() {
        let cfg = RsiConfig::new(9).with_oversample(2);
        assert_eq!(cfg.sketch_dim(&[2; 6]), 7);
        assert_eq!(cfg.sketch_dim(&[2, 3, 2]), 5);
    }

    #[test]
    fn rank_one_product_is_exact() {
        let a = TensorTrain::rank_one(&vec![vec![1.0, 2.0]; 6]).unwrap();
        let b = TensorTrain::rank_one(&vec![vec![-0.5, 3.0]; 6]).unwrap();
        let rep = rsi_hadamard(&[a.clone(), b.clone()], &RsiConfig::new(4)).unwrap();
        let truth = hadamard_direct(&a, &b).unwrap();
        assert!(relative_error(&rep.output, &truth).unwrap() <= 1e-12);
        assert!(rep.output.bond_dims().iter().all(|&r| r == 1));
    }

    #[test]
    fn random_product_matches_direct() {
        let a = TensorTrain::random(6, 2, 3, 1).unwrap();
        let b = TensorTrain::random(6, 2, 3, 2).unwrap();
        let cfg = RsiConfig::new(9).with_oversample(2).with_seed(5);
        let rep = rsi_hadamard(&[a.clone(), b.clone()], &cfg).unwrap();
        let truth = hadamard_direct(&a, &b).unwrap();
        assert!(relative_error(&rep.output, &truth).unwrap() <= 1e-10);
        rep.trail.validate_nesting().unwrap();
        assert_eq!(rep.output.bond_dims(), rep.trail.sizes());
        assert!(rep.iterations.iter().any(|it| it.sketched));
    }

    #[test]
    fn order_two_uses_dense_path() {
        let a = TensorTrain::random(2, 3, 3, 1).unwrap();
        let b = TensorTrain::random(2, 3, 3, 2).unwrap();
        let rep = rsi_hadamard(&[a.clone(), b.clone()], &RsiConfig::new(3)).unwrap();
        let truth = hadamard_direct(&a, &b).unwrap();
        assert!(relative_error(&rep.output, &truth).unwrap() <= 1e-12);
        assert!(rep.iterations.iter().all(|it| !it.sketched));
    }

    #[test]
    fn zero_input_gives_zero_train() {
        let a = TensorTrain::zeros(&[2; 5]).unwrap();
        let b = TensorTrain::random(5, 2, 3, 2).unwrap();
        let rep = rsi_hadamard(&[a, b], &RsiConfig::new(4)).unwrap();
        assert!(rep.zero_output);
        assert_eq!(rep.output.bond_dims(), vec![1; 4]);
        assert_eq!(crate::tt::norm(&rep.output), 0.0);
    }

    #[test]
    fn map_rejects_non_finite_values() {
        let a = TensorTrain::random(5, 2, 2, 3).unwrap();
        let f = |x: f64| 1.0 / (x - x);
        assert!(matches!(
            rsi_map(&a, &f, &RsiConfig::new(4)),
            Err(TtError::Domain(_))
        ));
    }

    #[test]
    fn config_and_shape_errors() {
        let a = TensorTrain::random(4, 2, 2, 3).unwrap();
        let b = TensorTrain::random(4, 3, 2, 3).unwrap();
        assert!(matches!(
            rsi_hadamard(&[a.clone(), b], &RsiConfig::new(4)),
            Err(TtError::Shape(_))
        ));
        assert!(matches!(
            rsi_hadamard(&[a.clone()], &RsiConfig::new(4)),
            Err(TtError::Config(_))
        ));
        assert!(matches!(
            rsi_hadamard(&[a.clone(), a], &RsiConfig::new(0)),
            Err(TtError::Config(_))
        ));
    }

    #[test]
    fn trail_validator_rejects_broken_nesting() {
        let trail = PivotTrail {
            sets: vec![
                PivotSet { rows: vec![0], multi: vec![vec![0]] },
                PivotSet { rows: vec![3], multi: vec![vec![1, 1]] },
            ],
        };
        assert!(trail.validate_nesting().is_err());
    }
}
