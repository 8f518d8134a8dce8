//! Floating-point operation accounting.
//!
//! Counts use the textbook leading-order formulas for each dense kernel, so
//! they measure algorithmic work independent of the machine.

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct OpCounter {
    flops: f64,
}

impl OpCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn flops(&self) -> f64 {
        self.flops
    }

    pub fn add(&mut self, flops: f64) {
        self.flops += flops;
    }

    pub fn gemm(&mut self, m: usize, k: usize, n: usize) {
        self.flops += gemm_flops(m, k, n);
    }

    pub fn qr(&mut self, m: usize, n: usize) {
        self.flops += qr_flops(m, n);
    }

    pub fn svd(&mut self, m: usize, n: usize) {
        self.flops += svd_flops(m, n);
    }

    /// One full-pivot search plus rank-one Schur update on an `m x n` block.
    pub fn lu_step(&mut self, m: usize, n: usize) {
        self.flops += 3.0 * (m * n) as f64;
    }
}

pub fn gemm_flops(m: usize, k: usize, n: usize) -> f64 {
    2.0 * m as f64 * k as f64 * n as f64
}

/// Householder QR including formation of the thin orthogonal factor.
pub fn qr_flops(m: usize, n: usize) -> f64 {
    let (p, q) = (m.min(n) as f64, m.max(n) as f64);
    2.0 * (2.0 * q * p * p - 2.0 * p * p * p / 3.0)
}

/// Thin SVD with both singular-vector factors (R-SVD variant).
pub fn svd_flops(m: usize, n: usize) -> f64 {
    let (p, q) = (m.min(n) as f64, m.max(n) as f64);
    6.0 * q * p * p + 20.0 * p * p * p
}
