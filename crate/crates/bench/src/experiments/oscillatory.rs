//! Product of two rapidly oscillating functions, with a sweep over the
//! sketch oversampling.

use rsi_core::baseline::{direct_exact, direct_product};
use rsi_core::qtt::{osc1, osc2, qtt_from_function, QttGrid};
use rsi_core::rsi_hadamard;
use rsi_core::tt::relative_error;
use serde_json::json;

use super::{check_list, direct_record, rsi_record, run_points, Outcome, RunSettings};
use crate::error::Result;

#[derive(Clone, Debug)]
pub struct OscillatoryParams {
    pub n_bits: usize,
    pub chi_in: usize,
    pub chi_out: Vec<usize>,
    pub oversample: Vec<usize>,
}

impl Default for OscillatoryParams {
    fn default() -> Self {
        Self {
            n_bits: 20,
            chi_in: 10,
            chi_out: vec![10, 15, 20, 25, 30, 40],
            oversample: vec![0, 5, 10],
        }
    }
}

pub fn exp_oscillatory(params: &OscillatoryParams, settings: &RunSettings) -> Result<Outcome> {
    settings.validate()?;
    check_list("chi_out", &params.chi_out)?;
    check_list("chi_in", &[params.chi_in])?;
    if params.oversample.is_empty() {
        return Err(crate::error::BenchError::Config("oversample list is empty".into()));
    }
    let grid = QttGrid::unit(params.n_bits)?;
    let f1 = qtt_from_function(&*osc1(), &grid, params.chi_in, 1e-14)?;
    let f2 = qtt_from_function(&*osc2(), &grid, params.chi_in, 1e-14)?;
    let inputs = [f1.clone(), f2.clone()];
    let truth = direct_exact(&inputs, settings.direct_mem_cap)?;
    let chi_in = f1.max_bond().max(f2.max_bond());

    // `None` marks the direct baseline.
    let mut points: Vec<(usize, Option<usize>, u64)> = Vec::new();
    for &chi_out in &params.chi_out {
        for &seed in &settings.seeds {
            points.push((chi_out, None, seed));
            for &p in &params.oversample {
                points.push((chi_out, Some(p), seed));
            }
        }
    }
    let records = run_points(&points, settings.parallel, |&(chi_out, p, seed)| {
        let (output, mut rec) = match p {
            Some(p) => {
                let cfg = settings.rsi_config(chi_out, seed).with_oversample(p);
                let report = rsi_hadamard(&inputs, &cfg)?;
                let rec = rsi_record("oscillatory", &report, &cfg, chi_in);
                (report.output, rec)
            }
            None => {
                let res = direct_product(&inputs, chi_out, 0.0, settings.direct_mem_cap)?;
                let rec = direct_record("oscillatory", &res, chi_in, chi_out, seed);
                (res.output, rec)
            }
        };
        rec.rel_error = Some(relative_error(&output, &truth)?);
        Ok(vec![rec])
    })?;

    let mut outcome = Outcome {
        records,
        ..Default::default()
    };
    outcome.summary.insert("input_bonds".into(), json!([f1.bond_dims(), f2.bond_dims()]));
    Ok(outcome)
}
