//! Products of Gaussian bumps encoded as quantics trains.

use rsi_core::baseline::{direct_exact, direct_product};
use rsi_core::qtt::{gaussian, qtt_from_function, QttGrid};
use rsi_core::tt::relative_error;
use rsi_core::{rsi_hadamard, TensorTrain};
use serde_json::json;

use super::{check_list, direct_record, rsi_record, run_points, Outcome, RunSettings};
use crate::error::{BenchError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GaussianVariant {
    /// `f1 f2` for two bumps at `mu1`, `mu2`.
    Separation,
    /// `f1 f2` for two narrow, nearly coincident bumps.
    Spike,
    /// `f1 f2`, `f1 f2^2` and `f1^2 f2^2` at each output bond.
    Multiproduct,
}

impl std::str::FromStr for GaussianVariant {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "separation" => Ok(Self::Separation),
            "spike" => Ok(Self::Spike),
            "multiproduct" => Ok(Self::Multiproduct),
            other => Err(BenchError::Config(format!(
                "unknown gaussian variant {other:?}; expected separation, spike or multiproduct"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GaussianParams {
    pub variant: GaussianVariant,
    pub n_bits: usize,
    /// Bond cap of the input encodings.
    pub chi_in: usize,
    pub mu1: f64,
    pub mu2: f64,
    pub sigma: f64,
    pub chi_out: Vec<usize>,
}

impl GaussianParams {
    pub fn new(variant: GaussianVariant) -> Self {
        let (mu1, mu2, sigma, chi_out) = match variant {
            GaussianVariant::Separation => (0.4, 0.6, 0.15, vec![4, 6, 8, 10, 12, 14, 16]),
            GaussianVariant::Spike => (0.49, 0.51, 0.01, vec![4, 6, 8, 10, 12, 14, 16]),
            GaussianVariant::Multiproduct => (0.4, 0.6, 0.15, vec![15]),
        };
        Self {
            variant,
            n_bits: 20,
            chi_in: 10,
            mu1,
            mu2,
            sigma,
            chi_out,
        }
    }
}

/// Tolerance used when encoding the inputs.
const INPUT_EPS: f64 = 1e-14;
/// Encoding of sampled products used as reference values.
const TRUTH_CHI: usize = 64;
const TRUTH_EPS: f64 = 1e-15;

fn encode(grid: &QttGrid, f: &dyn Fn(f64) -> f64, chi: usize) -> Result<TensorTrain> {
    Ok(qtt_from_function(f, grid, chi, INPUT_EPS)?)
}

pub fn exp_gaussian(params: &GaussianParams, settings: &RunSettings) -> Result<Outcome> {
    settings.validate()?;
    check_list("chi_out", &params.chi_out)?;
    if !(params.sigma > 0.0) || !params.sigma.is_finite() {
        return Err(BenchError::Config(format!("sigma must be positive, got {}", params.sigma)));
    }
    if params.chi_in == 0 {
        return Err(BenchError::Config("chi_in must be at least 1".into()));
    }
    let grid = QttGrid::unit(params.n_bits)?;
    let g1 = gaussian(params.mu1, params.sigma);
    let g2 = gaussian(params.mu2, params.sigma);
    let f1 = encode(&grid, &*g1, params.chi_in)?;
    let f2 = encode(&grid, &*g2, params.chi_in)?;

    // (label, factors, truth)
    let mut cases: Vec<(&str, Vec<TensorTrain>, TensorTrain)> = Vec::new();
    match params.variant {
        GaussianVariant::Separation | GaussianVariant::Spike => {
            let name = if params.variant == GaussianVariant::Spike {
                "gaussian-spike"
            } else {
                "gaussian-separation"
            };
            let inputs = vec![f1.clone(), f2.clone()];
            let truth = direct_exact(&inputs, settings.direct_mem_cap)?;
            cases.push((name, inputs, truth));
        }
        GaussianVariant::Multiproduct => {
            // Exact products of three or four inputs are too large to form,
            // so the truth is the sampled product encoded at full accuracy.
            let truth_of = |a: usize, b: usize| -> Result<TensorTrain> {
                let f = |x: f64| g1(x).powi(a as i32) * g2(x).powi(b as i32);
                Ok(qtt_from_function(&f, &grid, TRUTH_CHI, TRUTH_EPS)?)
            };
            cases.push(("gaussian-f1f2", vec![f1.clone(), f2.clone()], truth_of(1, 1)?));
            cases.push((
                "gaussian-f1f2^2",
                vec![f1.clone(), f2.clone(), f2.clone()],
                truth_of(1, 2)?,
            ));
            cases.push((
                "gaussian-f1^2f2^2",
                vec![f1.clone(), f1.clone(), f2.clone(), f2.clone()],
                truth_of(2, 2)?,
            ));
        }
    }

    let chi_in = f1.max_bond().max(f2.max_bond());
    let mut points = Vec::new();
    for (c, _) in cases.iter().enumerate() {
        for &chi_out in &params.chi_out {
            for &seed in &settings.seeds {
                points.push((c, chi_out, seed, true));
                points.push((c, chi_out, seed, false));
            }
        }
    }
    let records = run_points(&points, settings.parallel, |&(c, chi_out, seed, sketched)| {
        let (name, inputs, truth) = &cases[c];
        let (output, mut rec) = if sketched {
            let cfg = settings.rsi_config(chi_out, seed);
            let report = rsi_hadamard(inputs, &cfg)?;
            let rec = rsi_record(name, &report, &cfg, chi_in);
            (report.output, rec)
        } else {
            let res = direct_product(inputs, chi_out, 0.0, settings.direct_mem_cap)?;
            let rec = direct_record(name, &res, chi_in, chi_out, seed);
            (res.output, rec)
        };
        rec.rel_error = Some(relative_error(&output, truth)?);
        Ok(vec![rec])
    })?;

    let mut outcome = Outcome {
        records,
        ..Default::default()
    };
    outcome.summary.insert("mu1".into(), json!(params.mu1));
    outcome.summary.insert("mu2".into(), json!(params.mu2));
    outcome.summary.insert("sigma".into(), json!(params.sigma));
    outcome.summary.insert("input_bonds".into(), json!([f1.bond_dims(), f2.bond_dims()]));
    Ok(outcome)
}
