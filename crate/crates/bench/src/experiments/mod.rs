//! Experiment drivers. Each returns one record per method, parameter point
//! and seed, plus a free-form summary.

mod gaussian;
mod oscillatory;
mod psi2;
mod relu;
mod scaling;

pub use gaussian::{exp_gaussian, GaussianParams, GaussianVariant};
pub use oscillatory::{exp_oscillatory, OscillatoryParams};
pub use psi2::{exp_psi_squared, hzz_expectation, hzz_from_probabilities, spin_weights, Psi2Params};
pub use relu::{exp_relu, ReluParams};
pub use scaling::{exp_scaling, run_scaling, ScalingParams, ScalingPoint};

use rayon::prelude::*;
use rsi_core::baseline::{default_memory_cap, DirectResult};
use rsi_core::{RsiConfig, RsiReport};
use serde_json::{Map, Value};

use crate::error::{BenchError, Result};
use crate::record::{ExperimentRecord, Method};

/// Settings shared by every experiment.
#[derive(Clone, Debug)]
pub struct RunSettings {
    pub eps_id: f64,
    pub oversample: usize,
    /// One run per seed at every parameter point.
    pub seeds: Vec<u64>,
    /// Run parameter points concurrently; timings are then unreliable.
    pub parallel: bool,
    /// Working-memory budget of the direct method, in `f64` entries.
    pub direct_mem_cap: usize,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            eps_id: f64::EPSILON,
            oversample: 5,
            seeds: (0..5).collect(),
            parallel: false,
            direct_mem_cap: default_memory_cap(),
        }
    }
}

impl RunSettings {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(BenchError::Config("at least one seed is required".into()));
        }
        RsiConfig::new(1).with_eps_id(self.eps_id).validate()?;
        Ok(())
    }

    pub fn rsi_config(&self, chi_out: usize, seed: u64) -> RsiConfig {
        RsiConfig::new(chi_out)
            .with_eps_id(self.eps_id)
            .with_oversample(self.oversample)
            .with_seed(seed)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Outcome {
    pub records: Vec<ExperimentRecord>,
    pub summary: Map<String, Value>,
}

pub(crate) fn check_list(name: &str, values: &[usize]) -> Result<()> {
    if values.is_empty() || values.contains(&0) {
        return Err(BenchError::Config(format!("{name} needs positive values, got {values:?}")));
    }
    Ok(())
}

/// Runs `f` over `points`, concurrently if requested, keeping input order.
pub(crate) fn run_points<T, F>(points: &[T], parallel: bool, f: F) -> Result<Vec<ExperimentRecord>>
where
    T: Sync,
    F: Fn(&T) -> Result<Vec<ExperimentRecord>> + Sync + Send,
{
    let parts: Vec<Result<Vec<ExperimentRecord>>> = if parallel {
        points.par_iter().map(&f).collect()
    } else {
        points.iter().map(&f).collect()
    };
    let mut out = Vec::new();
    for p in parts {
        out.extend(p?);
    }
    Ok(out)
}

pub(crate) fn rsi_record(
    experiment: &str,
    report: &RsiReport,
    cfg: &RsiConfig,
    chi_in: usize,
) -> ExperimentRecord {
    let phys = report.output.phys_dims();
    let d = phys.iter().copied().max().unwrap_or(1);
    let mut r = ExperimentRecord::new(experiment, Method::Rsi, phys.len(), d, chi_in, cfg.chi_max, cfg.seed);
    r.k = Some(report.k);
    r.p = Some(cfg.oversample);
    r.eps_id = Some(cfg.eps_id);
    r.t_sketch_ns = Some(report.sketch_ns);
    r.t_iter_ns = Some(report.iter_ns);
    r
}

pub(crate) fn direct_record(
    experiment: &str,
    result: &DirectResult,
    chi_in: usize,
    chi_out: usize,
    seed: u64,
) -> ExperimentRecord {
    let phys = result.output.phys_dims();
    let d = phys.iter().copied().max().unwrap_or(1);
    let mut r = ExperimentRecord::new(experiment, Method::Direct, phys.len(), d, chi_in, chi_out, seed);
    r.t_kron_ns = Some(result.kron_ns);
    r.t_round_ns = Some(result.round_ns);
    r
}
