//! Direct elementwise products: exact Kronecker cores followed by rounding.

use std::time::Instant;

use crate::error::{Result, TtError};
use crate::ops::{gemm_flops, qr_flops, svd_flops, OpCounter};
use crate::tt::{hadamard_direct_counted, round_owned, TensorTrain};

#[derive(Clone, Debug)]
pub struct DirectResult {
    pub output: TensorTrain,
    pub kron_ns: u64,
    pub round_ns: u64,
    pub flops: f64,
}

/// Entries of working memory needed to form and round the Kronecker train
/// of `a` and `b`: the train itself plus factorization workspace for its
/// largest core.
pub fn direct_memory_entries(a: &TensorTrain, b: &TensorTrain) -> usize {
    let mut total = 0usize;
    let mut largest = 0usize;
    for (ca, cb) in a.cores().iter().zip(b.cores()) {
        let size = (ca.left() * cb.left())
            .saturating_mul(ca.phys())
            .saturating_mul(ca.right() * cb.right());
        total = total.saturating_add(size);
        largest = largest.max(size);
    }
    total.saturating_add(largest.saturating_mul(4))
}

/// Available memory in bytes from `/proc/meminfo`, if readable.
pub fn available_memory_bytes() -> Option<u64> {
    let text = std::fs::read_to_string("/proc/meminfo").ok()?;
    let line = text.lines().find(|l| l.starts_with("MemAvailable:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// Default working-memory budget in `f64` entries: 60% of available memory,
/// or 2^28 entries when the amount cannot be determined.
pub fn default_memory_cap() -> usize {
    available_memory_bytes()
        .map(|b| (b as f64 * 0.6 / 8.0) as usize)
        .unwrap_or(1 << 28)
}

/// Multiplies the inputs pairwise from the left, rounding after each
/// Kronecker step to `chi_max` and `eps`. Fails with a capacity error before
/// allocating if a step would need more than `mem_cap` entries.
pub fn direct_product(
    inputs: &[TensorTrain],
    chi_max: usize,
    eps: f64,
    mem_cap: usize,
) -> Result<DirectResult> {
    if inputs.len() < 2 {
        return Err(TtError::Config("a product needs at least two inputs".into()));
    }
    let mut ops = OpCounter::new();
    let mut acc = inputs[0].clone();
    let (mut kron_ns, mut round_ns) = (0u64, 0u64);
    for next in &inputs[1..] {
        let need = direct_memory_entries(&acc, next);
        if need > mem_cap {
            return Err(TtError::Capacity {
                requested: need,
                cap: mem_cap,
            });
        }
        let t = Instant::now();
        let kron = hadamard_direct_counted(&acc, next, &mut ops)?;
        kron_ns += t.elapsed().as_nanos() as u64;
        let t = Instant::now();
        acc = round_owned(kron, chi_max, eps, &mut ops)?;
        round_ns += t.elapsed().as_nanos() as u64;
    }
    Ok(DirectResult {
        output: acc,
        kron_ns,
        round_ns,
        flops: ops.flops(),
    })
}

/// Exact product without rounding.
pub fn direct_exact(inputs: &[TensorTrain], mem_cap: usize) -> Result<TensorTrain> {
    if inputs.len() < 2 {
        return Err(TtError::Config("a product needs at least two inputs".into()));
    }
    let mut acc = inputs[0].clone();
    for next in &inputs[1..] {
        let need = direct_memory_entries(&acc, next);
        if need > mem_cap {
            return Err(TtError::Capacity {
                requested: need,
                cap: mem_cap,
            });
        }
        acc = hadamard_direct_counted(&acc, next, &mut OpCounter::new())?;
    }
    Ok(acc)
}

/// Internal bonds of the Kronecker train of `a` and `b`.
pub fn kron_bonds(a: &TensorTrain, b: &TensorTrain) -> Vec<usize> {
    a.bond_dims()
        .iter()
        .zip(b.bond_dims())
        .map(|(x, y)| x * y)
        .collect()
}

/// Operation count of one Kronecker step plus rounding to `chi_max`, for
/// a Kronecker train with the given physical and internal bond dimensions,
/// assuming every truncation keeps as many singular values as allowed.
/// Mirrors the counting done by [`direct_product`].
pub fn direct_flops_model(phys: &[usize], kron_bonds: &[usize], chi_max: usize) -> f64 {
    let n = phys.len();
    let mut bonds = vec![1usize];
    bonds.extend_from_slice(kron_bonds);
    bonds.push(1);
    let mut flops: f64 = (0..n).map(|j| (bonds[j] * phys[j] * bonds[j + 1]) as f64).sum();
    for j in (1..n).rev() {
        let (l, d, r) = (bonds[j], phys[j], bonds[j + 1]);
        flops += qr_flops(d * r, l);
        let p = l.min(d * r);
        flops += gemm_flops(bonds[j - 1] * phys[j - 1], l, p);
        bonds[j] = p;
    }
    for j in 0..n - 1 {
        let (l, d, r) = (bonds[j], phys[j], bonds[j + 1]);
        flops += svd_flops(l * d, r);
        let k = chi_max.min(l * d).min(r);
        flops += gemm_flops(k, r, phys[j + 1] * bonds[j + 2]);
        bonds[j + 1] = k;
    }
    flops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tt::{hadamard_direct, relative_error};

    #[test]
    fn matches_exact_product_when_lossless() {
        let a = TensorTrain::random(5, 2, 3, 1).unwrap();
        let b = TensorTrain::random(5, 2, 3, 2).unwrap();
        let r = direct_product(&[a.clone(), b.clone()], 9, 1e-14, 1 << 20).unwrap();
        let truth = hadamard_direct(&a, &b).unwrap();
        assert!(relative_error(&r.output, &truth).unwrap() <= 1e-12);
    }

    #[test]
    fn respects_memory_cap() {
        let a = TensorTrain::random(5, 2, 3, 1).unwrap();
        assert!(matches!(
            direct_product(&[a.clone(), a], 9, 0.0, 10),
            Err(TtError::Capacity { .. })
        ));
    }

    #[test]
    fn flop_model_matches_counter() {
        let a = TensorTrain::random(8, 2, 4, 1).unwrap();
        let b = TensorTrain::random(8, 2, 4, 2).unwrap();
        let r = direct_product(&[a.clone(), b.clone()], 4, 0.0, 1 << 24).unwrap();
        let kron = hadamard_direct(&a, &b).unwrap();
        let model = direct_flops_model(&kron.phys_dims(), &kron.bond_dims(), 4);
        assert!((model - r.flops).abs() <= 1e-9 * r.flops, "{model} vs {}", r.flops);
    }
}
