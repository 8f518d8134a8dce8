//! Cost growth in the bond dimension for products of random trains.

use std::time::Instant;

use rsi_core::baseline::{direct_flops_model, direct_memory_entries, direct_product, kron_bonds};
use rsi_core::{rsi_hadamard, TensorTrain};
use serde_json::{json, Value};

use super::{check_list, direct_record, rsi_record, Outcome, RunSettings};
use crate::error::{BenchError, Result};
use crate::record::{ExperimentRecord, Method};
use crate::stats::{loglog_slope, median};

#[derive(Clone, Debug)]
pub struct ScalingParams {
    pub n: usize,
    pub d: usize,
    pub chi: Vec<usize>,
    /// Direct runs per bond dimension; each is far slower than a sketched run.
    pub direct_runs: usize,
    /// Seed of the first input; the second uses the next seed.
    pub input_seed: u64,
}

impl Default for ScalingParams {
    fn default() -> Self {
        Self {
            n: 20,
            d: 2,
            chi: vec![16, 32, 64, 128],
            direct_runs: 1,
            input_seed: 1,
        }
    }
}

/// Per bond dimension: median times, operation counts, and whether the
/// direct method fit in memory.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalingPoint {
    pub chi: usize,
    pub rsi_ns: f64,
    pub rsi_flops: f64,
    pub direct_ns: Option<f64>,
    pub direct_kron_ns: Option<f64>,
    pub direct_round_ns: Option<f64>,
    /// Counted when the direct method ran, modeled otherwise.
    pub direct_flops: f64,
    pub direct_entries: usize,
}

/// Runs every bond dimension sequentially regardless of
/// `settings.parallel`, since the result is a timing comparison.
pub fn exp_scaling(params: &ScalingParams, settings: &RunSettings) -> Result<Outcome> {
    Ok(run_scaling(params, settings)?.1)
}

/// Like [`exp_scaling`], also returning the per-point summary.
pub fn run_scaling(params: &ScalingParams, settings: &RunSettings) -> Result<(Vec<ScalingPoint>, Outcome)> {
    settings.validate()?;
    check_list("chi", &params.chi)?;
    if params.n < 3 || params.d < 2 {
        return Err(BenchError::Config(format!(
            "scaling needs n >= 3 and d >= 2, got n={} d={}",
            params.n, params.d
        )));
    }
    let mut records = Vec::new();
    let mut points = Vec::new();
    for &chi in &params.chi {
        let a = TensorTrain::random(params.n, params.d, chi, params.input_seed)?;
        let b = TensorTrain::random(params.n, params.d, chi, params.input_seed + 1)?;
        let inputs = [a, b];
        let chi_in = inputs[0].max_bond();

        let (mut rsi_ns, mut rsi_flops) = (Vec::new(), 0.0);
        for &seed in &settings.seeds {
            let cfg = settings.rsi_config(chi, seed);
            let t = Instant::now();
            let report = rsi_hadamard(&inputs, &cfg)?;
            rsi_ns.push(t.elapsed().as_nanos() as f64);
            rsi_flops = report.flops;
            records.push(rsi_record("scaling", &report, &cfg, chi_in));
        }

        let entries = direct_memory_entries(&inputs[0], &inputs[1]);
        let mut direct = (Vec::new(), Vec::new(), Vec::new());
        let mut direct_flops = direct_flops_model(&inputs[0].phys_dims(), &kron_bonds(&inputs[0], &inputs[1]), chi);
        if entries <= settings.direct_mem_cap {
            for run in 0..params.direct_runs {
                let t = Instant::now();
                let res = direct_product(&inputs, chi, 0.0, settings.direct_mem_cap)?;
                direct.0.push(t.elapsed().as_nanos() as f64);
                direct.1.push(res.kron_ns as f64);
                direct.2.push(res.round_ns as f64);
                direct_flops = res.flops;
                records.push(direct_record("scaling", &res, chi_in, chi, run as u64));
            }
        } else {
            records.push(ExperimentRecord::new("scaling", Method::Direct, params.n, params.d, chi_in, chi, 0));
        }
        points.push(ScalingPoint {
            chi,
            rsi_ns: median(&rsi_ns).unwrap_or(f64::NAN),
            rsi_flops,
            direct_ns: median(&direct.0),
            direct_kron_ns: median(&direct.1),
            direct_round_ns: median(&direct.2),
            direct_flops,
            direct_entries: entries,
        });
    }

    let mut outcome = Outcome {
        records,
        ..Default::default()
    };
    let slope = |f: &dyn Fn(&ScalingPoint) -> Option<f64>| -> Value {
        let pts: Vec<(f64, f64)> = points.iter().filter_map(|p| f(p).map(|y| (p.chi as f64, y))).collect();
        json!(loglog_slope(&pts))
    };
    outcome.summary.insert("slope_rsi_time".into(), slope(&|p| Some(p.rsi_ns)));
    outcome.summary.insert("slope_direct_time".into(), slope(&|p| p.direct_ns));
    outcome.summary.insert("slope_rsi_flops".into(), slope(&|p| Some(p.rsi_flops)));
    outcome.summary.insert("slope_direct_flops".into(), slope(&|p| Some(p.direct_flops)));
    outcome.summary.insert(
        "points".into(),
        Value::Array(
            points
                .iter()
                .map(|p| {
                    json!({
                        "chi": p.chi,
                        "rsi_ns": p.rsi_ns,
                        "rsi_flops": p.rsi_flops,
                        "direct_ns": p.direct_ns,
                        "direct_kron_ns": p.direct_kron_ns,
                        "direct_round_ns": p.direct_round_ns,
                        "direct_flops": p.direct_flops,
                        "direct_entries": p.direct_entries,
                        "direct_mem_cap": settings.direct_mem_cap,
                    })
                })
                .collect(),
        ),
    );
    Ok((points, outcome))
}
