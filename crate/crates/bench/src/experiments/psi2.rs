//! Squared amplitudes of a random spin chain state, checked through the
//! nearest-neighbour `S^z S^z` correlator.

use rsi_core::baseline::direct_product;
use rsi_core::linalg::Matrix;
use rsi_core::tt::{hadamard_direct, relative_error};
use rsi_core::{rsi_hadamard, Core, TensorTrain};
use serde_json::json;

use super::{check_list, direct_record, rsi_record, run_points, Outcome, RunSettings};
use crate::error::{BenchError, Result};

#[derive(Clone, Debug)]
pub struct Psi2Params {
    pub n: usize,
    pub d: usize,
    pub chi_in: usize,
    /// Output bonds to sweep; the exact product needs `chi_in^2`.
    pub chi_out: Vec<usize>,
    pub psi_seed: u64,
}

impl Default for Psi2Params {
    fn default() -> Self {
        Self {
            n: 20,
            d: 3,
            chi_in: 10,
            chi_out: vec![2, 4, 6, 8, 10, 100],
            psi_seed: 1,
        }
    }
}

/// `S^z` eigenvalues of a spin with `d` levels, highest first: `+1, 0, -1`
/// for `d = 3`.
pub fn spin_weights(d: usize) -> Vec<f64> {
    let top = (d as f64 - 1.0) / 2.0;
    (0..d).map(|i| top - i as f64).collect()
}

fn transfer_left(env: &Matrix, core: &Core, w: &[f64]) -> Matrix {
    let mut out = Matrix::zeros(core.right(), core.right());
    for (s, &ws) in w.iter().enumerate() {
        if ws == 0.0 {
            continue;
        }
        let a = core.slice(s);
        let mut t = a.transpose().matmul(&env.matmul(&a));
        t.scale(ws);
        for (o, v) in out.as_mut_slice().iter_mut().zip(t.as_slice()) {
            *o += v;
        }
    }
    out
}

fn transfer_right(env: &Matrix, core: &Core, w: &[f64]) -> Matrix {
    let mut out = Matrix::zeros(core.left(), core.left());
    for (s, &ws) in w.iter().enumerate() {
        if ws == 0.0 {
            continue;
        }
        let a = core.slice(s);
        let mut t = a.matmul(&env).matmul(&a.transpose());
        t.scale(ws);
        for (o, v) in out.as_mut_slice().iter_mut().zip(t.as_slice()) {
            *o += v;
        }
    }
    out
}

/// `sum_j <psi| S^z_j S^z_{j+1} |psi>` by contracting the state with itself.
pub fn hzz_expectation(psi: &TensorTrain) -> f64 {
    let n = psi.order();
    let cores = psi.cores();
    let sz: Vec<Vec<f64>> = cores.iter().map(|c| spin_weights(c.phys())).collect();
    let ones: Vec<Vec<f64>> = cores.iter().map(|c| vec![1.0; c.phys()]).collect();

    let mut left = vec![Matrix::identity(1)];
    for j in 0..n {
        let next = transfer_left(&left[j], &cores[j], &ones[j]);
        left.push(next);
    }
    let mut right = vec![Matrix::identity(1); n + 1];
    for j in (0..n).rev() {
        right[j] = transfer_right(&right[j + 1], &cores[j], &ones[j]);
    }
    (0..n - 1)
        .map(|j| {
            let e = transfer_left(&left[j], &cores[j], &sz[j]);
            let e = transfer_left(&e, &cores[j + 1], &sz[j + 1]);
            e.as_slice().iter().zip(right[j + 2].as_slice()).map(|(a, b)| a * b).sum::<f64>()
        })
        .sum()
}

fn weigh_left(v: &[f64], core: &Core, w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; core.right()];
    for (a, &va) in v.iter().enumerate() {
        for (s, &ws) in w.iter().enumerate() {
            let f = va * ws;
            if f == 0.0 {
                continue;
            }
            for (b, o) in out.iter_mut().enumerate() {
                *o += f * core.get(a, s, b);
            }
        }
    }
    out
}

fn weigh_right(v: &[f64], core: &Core, w: &[f64]) -> Vec<f64> {
    (0..core.left())
        .map(|a| {
            w.iter()
                .enumerate()
                .map(|(s, &ws)| ws * (0..core.right()).map(|b| core.get(a, s, b) * v[b]).sum::<f64>())
                .sum()
        })
        .collect()
}

/// The same correlator read off a train of probabilities `|psi|^2`: the sum
/// over `j` of the train contracted with `S^z` weights at sites `j, j+1` and
/// ones elsewhere.
pub fn hzz_from_probabilities(prob: &TensorTrain) -> f64 {
    let n = prob.order();
    let cores = prob.cores();
    let sz: Vec<Vec<f64>> = cores.iter().map(|c| spin_weights(c.phys())).collect();
    let ones: Vec<Vec<f64>> = cores.iter().map(|c| vec![1.0; c.phys()]).collect();

    let mut left = vec![vec![1.0]];
    for j in 0..n {
        let next = weigh_left(&left[j], &cores[j], &ones[j]);
        left.push(next);
    }
    let mut right = vec![vec![1.0]; n + 1];
    for j in (0..n).rev() {
        right[j] = weigh_right(&right[j + 1], &cores[j], &ones[j]);
    }
    (0..n - 1)
        .map(|j| {
            let v = weigh_left(&left[j], &cores[j], &sz[j]);
            let v = weigh_left(&v, &cores[j + 1], &sz[j + 1]);
            v.iter().zip(&right[j + 2]).map(|(a, b)| a * b).sum::<f64>()
        })
        .sum()
}

/// Squares a normalized random state by both methods and reports the
/// correlator deviation `Z` and the error against the exact square.
pub fn exp_psi_squared(params: &Psi2Params, settings: &RunSettings) -> Result<Outcome> {
    settings.validate()?;
    check_list("chi_out", &params.chi_out)?;
    if params.n < 3 || params.d < 2 || params.chi_in == 0 {
        return Err(BenchError::Config(format!(
            "psi2 needs n >= 3, d >= 2, chi_in >= 1 (got n={}, d={}, chi_in={})",
            params.n, params.d, params.chi_in
        )));
    }
    let psi = TensorTrain::random_with_dims(&vec![params.d; params.n], params.chi_in, params.psi_seed)?.normalize()?;
    let chi_in = psi.max_bond();
    let exact = hadamard_direct(&psi, &psi)?;
    let hzz = hzz_expectation(&psi);

    let points: Vec<(usize, u64, bool)> = params
        .chi_out
        .iter()
        .flat_map(|&c| settings.seeds.iter().flat_map(move |&s| [(c, s, true), (c, s, false)]))
        .collect();
    let records = run_points(&points, settings.parallel, |&(chi_out, seed, sketched)| {
        let inputs = [psi.clone(), psi.clone()];
        let (output, mut rec) = if sketched {
            let cfg = settings.rsi_config(chi_out, seed);
            let report = rsi_hadamard(&inputs, &cfg)?;
            let rec = rsi_record("psi2", &report, &cfg, chi_in);
            (report.output, rec)
        } else {
            let res = direct_product(&inputs, chi_out, 0.0, settings.direct_mem_cap)?;
            let rec = direct_record("psi2", &res, chi_in, chi_out, seed);
            (res.output, rec)
        };
        rec.rel_error = Some(relative_error(&output, &exact)?);
        rec.z_dev = Some((hzz - hzz_from_probabilities(&output)).abs());
        Ok(vec![rec])
    })?;

    let mut outcome = Outcome {
        records,
        ..Default::default()
    };
    outcome.summary.insert("hzz".into(), json!(hzz));
    outcome.summary.insert("psi_seed".into(), json!(params.psi_seed));
    outcome.summary.insert("exact_max_bond".into(), json!(exact.max_bond()));
    Ok(outcome)
}
