//! Positive part of a sign-changing bump, computed as an elementwise map.

use rsi_core::qtt::{qtt_from_function, relu_target, QttGrid};
use rsi_core::rsi_map;
use serde_json::json;

use super::{check_list, rsi_record, run_points, Outcome, RunSettings};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct ReluParams {
    pub n_bits: usize,
    /// Bond cap of the input encoding.
    pub chi_in: usize,
    pub mu: f64,
    pub sigma: f64,
    pub shift: f64,
    pub chi_out: Vec<usize>,
}

impl Default for ReluParams {
    fn default() -> Self {
        Self {
            n_bits: 14,
            chi_in: 64,
            mu: 0.5,
            sigma: 0.1,
            shift: 0.5,
            chi_out: vec![5, 10, 15, 20, 25, 30, 35, 40],
        }
    }
}

/// Error of `approx` against dense reference values: relative to the
/// reference norm, or absolute when the reference is zero.
pub(crate) fn dense_error(approx: &[f64], truth: &[f64]) -> f64 {
    let diff = approx
        .iter()
        .zip(truth)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt();
    let scale = truth.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn exp_relu(params: &ReluParams, settings: &RunSettings) -> Result<Outcome> {
    settings.validate()?;
    check_list("chi_out", &params.chi_out)?;
    check_list("chi_in", &[params.chi_in])?;
    let grid = QttGrid::unit(params.n_bits)?;
    let f = relu_target(params.mu, params.sigma, params.shift);
    let input = qtt_from_function(&*f, &grid, params.chi_in, 1e-15)?;
    let truth: Vec<f64> = (0..grid.size()).map(|i| relu(f(grid.index_to_x(i)))).collect();
    let chi_in = input.max_bond();

    let points: Vec<(usize, u64)> = params
        .chi_out
        .iter()
        .flat_map(|&c| settings.seeds.iter().map(move |&s| (c, s)))
        .collect();
    let records = run_points(&points, settings.parallel, |&(chi_out, seed)| {
        let cfg = settings.rsi_config(chi_out, seed);
        let report = rsi_map(&input, &relu, &cfg)?;
        let mut rec = rsi_record("relu", &report, &cfg, chi_in);
        let dense = report.output.to_dense()?;
        rec.rel_error = Some(dense_error(dense.values(), &truth));
        Ok(vec![rec])
    })?;

    let mut outcome = Outcome {
        records,
        ..Default::default()
    };
    outcome.summary.insert("input_bonds".into(), json!(input.bond_dims()));
    Ok(outcome)
}
