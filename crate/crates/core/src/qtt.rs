//! Quantics tensor trains: a function on `2^n` uniform grid points stored as
//! an order-`n` train over the binary digits of the argument. Site 0 holds
//! the most significant bit.

use serde_json::Value;

use crate::error::{Result, TtError};
use crate::tt::{DenseTensor, TensorTrain, DEFAULT_DENSE_CAP};

#[derive(Clone, Debug, PartialEq)]
pub struct QttGrid {
    n_bits: usize,
    a: f64,
    b: f64,
}

impl QttGrid {
    /// Grid on `[a, b)` with `2^n_bits` points.
    pub fn new(n_bits: usize, a: f64, b: f64) -> Result<Self> {
        if n_bits < 2 || n_bits >= usize::BITS as usize {
            return Err(TtError::Config(format!("n_bits must be in [2, 63], got {n_bits}")));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(TtError::Config(format!("invalid interval [{a}, {b})")));
        }
        Ok(Self { n_bits, a, b })
    }

    pub fn unit(n_bits: usize) -> Result<Self> {
        Self::new(n_bits, 0.0, 1.0)
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn size(&self) -> usize {
        1usize << self.n_bits
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.size() as f64
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn bits_to_x(&self, bits: &[usize]) -> Result<f64> {
        if bits.len() != self.n_bits {
            return Err(TtError::Index(format!(
                "expected {} bits, got {}",
                self.n_bits,
                bits.len()
            )));
        }
        let mut frac = 0.0;
        let mut w = 0.5;
        for (j, &s) in bits.iter().enumerate() {
            if s > 1 {
                return Err(TtError::Index(format!("bit {j} has value {s}")));
            }
            frac += s as f64 * w;
            w *= 0.5;
        }
        Ok(self.a + (self.b - self.a) * frac)
    }

    /// Coordinate of the `i`-th grid point, `i` read most significant bit first.
    pub fn index_to_x(&self, i: usize) -> f64 {
        self.a + (self.b - self.a) * (i as f64 / self.size() as f64)
    }

    pub fn x_to_bits(&self, i: usize) -> Vec<usize> {
        (0..self.n_bits)
            .map(|j| (i >> (self.n_bits - 1 - j)) & 1)
            .collect()
    }

    /// Samples `f` at every grid point, ordered as a row-major binary tensor.
    pub fn sample(&self, f: &dyn Fn(f64) -> f64) -> Result<DenseTensor> {
        let size = self.size();
        if size > DEFAULT_DENSE_CAP {
            return Err(TtError::Capacity {
                requested: size,
                cap: DEFAULT_DENSE_CAP,
            });
        }
        let values: Vec<f64> = (0..size).map(|i| f(self.index_to_x(i))).collect();
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(TtError::Domain(format!(
                "function is not finite at x = {}",
                self.index_to_x(i)
            )));
        }
        DenseTensor::new(vec![2; self.n_bits], values)
    }
}

/// Samples `f` on the grid and compresses by TT-SVD.
pub fn qtt_from_function(
    f: &dyn Fn(f64) -> f64,
    grid: &QttGrid,
    chi_max: usize,
    eps: f64,
) -> Result<TensorTrain> {
    TensorTrain::from_dense(&grid.sample(f)?, chi_max, eps)
}

pub type Function = Box<dyn Fn(f64) -> f64 + Send + Sync>;

pub fn gaussian(mu: f64, sigma: f64) -> Function {
    Box::new(move |x| (-(x - mu) * (x - mu) / (2.0 * sigma * sigma)).exp())
}

/// `cos(2^10 x) exp(-x^2) + 4 exp(x) - 3 x^2 + 10 x`
pub fn osc1() -> Function {
    Box::new(|x| (1024.0 * x).cos() * (-x * x).exp() + 4.0 * x.exp() - 3.0 * x * x + 10.0 * x)
}

/// `sin(2^10 x) (exp(x^2) + 5 x + 2) - 4 x`
pub fn osc2() -> Function {
    Box::new(|x| (1024.0 * x).sin() * ((x * x).exp() + 5.0 * x + 2.0) - 4.0 * x)
}

/// Sign-changing bump `gaussian(mu, sigma) - shift`; its positive part has
/// kinks where the bump crosses `shift`.
pub fn relu_target(mu: f64, sigma: f64, shift: f64) -> Function {
    let g = gaussian(mu, sigma);
    Box::new(move |x| g(x) - shift)
}

pub const CATALOG: &[&str] = &["gaussian", "osc1", "osc2", "relu_target"];

fn param(params: &Value, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_f64()
            .ok_or_else(|| TtError::Config(format!("parameter {key} must be a number"))),
    }
}

/// Looks up a catalog function by name with parameters from a JSON object.
/// `gaussian` takes `mu` and `sigma` (defaults 0.5, 0.15); `relu_target`
/// takes `mu`, `sigma`, `shift` (defaults 0.5, 0.1, 0.5).
pub fn builtin(name: &str, params: &Value) -> Result<Function> {
    if !(params.is_null() || params.is_object()) {
        return Err(TtError::Config("function parameters must be a JSON object".into()));
    }
    let sigma_ok = |s: f64| {
        if s > 0.0 && s.is_finite() {
            Ok(s)
        } else {
            Err(TtError::Config(format!("sigma must be positive, got {s}")))
        }
    };
    match name {
        "gaussian" => Ok(gaussian(
            param(params, "mu", 0.5)?,
            sigma_ok(param(params, "sigma", 0.15)?)?,
        )),
        "osc1" => Ok(osc1()),
        "osc2" => Ok(osc2()),
        "relu_target" => Ok(relu_target(
            param(params, "mu", 0.5)?,
            sigma_ok(param(params, "sigma", 0.1)?)?,
            param(params, "shift", 0.5)?,
        )),
        other => Err(TtError::Config(format!(
            "unknown function {other:?}; available: {}",
            CATALOG.join(", ")
        ))),
    }
}
