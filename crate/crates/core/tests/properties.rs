//! Invariants over randomly drawn small instances.

use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rsi_core::linalg::Matrix;
use rsi_core::sketching::SketchBundle;
use rsi_core::tt::{from_json_str, hadamard_direct, inner, norm, relative_error, round, to_json_string};
use rsi_core::{prrlu_row_id, rsi_hadamard, RsiConfig, TensorTrain};

fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Matrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn all_indices(shape: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = shape.iter().product();
    (0..total)
        .map(|mut lin| {
            let mut idx = vec![0; shape.len()];
            for j in (0..shape.len()).rev() {
                idx[j] = lin % shape[j];
                lin /= shape[j];
            }
            idx
        })
        .collect()
}

fn pair(n: usize, d: usize, chi: usize, seed: u64) -> (TensorTrain, TensorTrain) {
    (
        TensorTrain::random(n, d, chi, 2 * seed).unwrap(),
        TensorTrain::random(n, d, chi, 2 * seed + 1).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn direct_product_is_exact_everywhere(n in 2usize..=6, d in 1usize..=3, chi in 1usize..=4, seed in 0u64..1000) {
        prop_assume!(d.pow(n as u32) <= 729);
        let (a, b) = pair(n, d, chi, seed);
        let c = hadamard_direct(&a, &b).unwrap();
        c.validate().unwrap();
        let idxs = all_indices(&a.phys_dims());
        let want: Vec<f64> = idxs.iter().map(|i| a.eval(i).unwrap() * b.eval(i).unwrap()).collect();
        let scale = want.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (idx, w) in idxs.iter().zip(&want) {
            prop_assert!((c.eval(idx).unwrap() - w).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn error_is_zero_on_itself_and_gauge_invariant(n in 3usize..=6, d in 2usize..=3, chi in 2usize..=4, seed in 0u64..1000) {
        let a = TensorTrain::random(n, d, chi, seed).unwrap();
        prop_assert!(relative_error(&a, &a).unwrap() <= 1e-12);
        let j = (seed as usize) % (n - 1);
        let r = a.bond_dims()[j];
        let mut m = random_matrix(r, r, seed + 7);
        for i in 0..r {
            m.set(i, i, m.get(i, i) + 3.0);
        }
        let inv = DMatrix::from_row_slice(r, r, m.as_slice()).try_inverse().unwrap();
        let m_inv = Matrix::from_fn(r, r, |p, q| inv[(p, q)]);
        let g = a.gauge_bond(j, &m, &m_inv).unwrap();
        g.validate().unwrap();
        prop_assert!(relative_error(&g, &a).unwrap() <= 1e-10);
    }

    #[test]
    fn rounding_error_shrinks_with_cap(n in 3usize..=6, d in 2usize..=3, seed in 0u64..1000) {
        let (a, b) = pair(n, d, 3, seed);
        let c = hadamard_direct(&a, &b).unwrap();
        let mut last = f64::INFINITY;
        for chi in 1..=9 {
            let r = round(&c, chi, 0.0).unwrap();
            r.validate().unwrap();
            prop_assert!(r.max_bond() <= chi);
            let e = relative_error(&r, &c).unwrap();
            prop_assert!(e <= last + 1e-12, "chi {} error {} after {}", chi, e, last);
            last = e;
        }
    }

    #[test]
    fn inner_product_is_symmetric(n in 2usize..=6, d in 1usize..=3, chi in 1usize..=4, seed in 0u64..1000) {
        let (a, b) = pair(n, d, chi, seed);
        let tol = 1e-12 * norm(&a) * norm(&b);
        prop_assert!((inner(&a, &b).unwrap() - inner(&b, &a).unwrap()).abs() <= tol);
        prop_assert!(inner(&a, &a).unwrap() >= 0.0);
    }

    #[test]
    fn id_factor_invariants(rows in 1usize..=24, cols in 1usize..=24, chi in 1usize..=24, seed in 0u64..1000) {
        let m = random_matrix(rows, cols, seed);
        let f = prrlu_row_id(&m, chi, 1e-14).unwrap();
        prop_assert!(f.rank <= chi.min(rows).min(cols));
        prop_assert_eq!(f.pivots.len(), f.rank);
        let mut seen = f.pivots.clone();
        seen.sort_unstable();
        seen.dedup();
        prop_assert_eq!(seen.len(), f.rank);
        let rec = f.reconstruct();
        for (t, &p) in f.pivots.iter().enumerate() {
            for c in 0..f.rank {
                prop_assert_eq!(f.x.get(p, c), if c == t { 1.0 } else { 0.0 });
            }
            prop_assert_eq!(f.skeleton.row(t), m.row(p));
            prop_assert_eq!(rec.row(p), m.row(p));
        }
    }

    #[test]
    fn remainder_shrinks_with_cap_on_semidefinite_input(size in 2usize..=16, inner_dim in 1usize..=16, seed in 0u64..1000) {
        let b = random_matrix(size, inner_dim, seed);
        let m = b.matmul(&b.transpose());
        let mut last = f64::INFINITY;
        for chi in 1..=size {
            let f = prrlu_row_id(&m, chi, 0.0).unwrap();
            prop_assert!(f.local_error <= last * (1.0 + 1e-12) + 1e-12, "chi {}: {} after {}", chi, f.local_error, last);
            last = f.local_error;
        }
    }

    #[test]
    fn sketched_product_structure(n in 3usize..=6, d in 2usize..=3, chi in 1usize..=3, chi_max in 1usize..=9, seed in 0u64..1000) {
        let (a, b) = pair(n, d, chi, seed);
        let cfg = RsiConfig::new(chi_max).with_seed(seed);
        let report = rsi_hadamard(&[a.clone(), b.clone()], &cfg).unwrap();
        let out = &report.output;
        out.validate().unwrap();
        report.trail.validate_nesting().unwrap();
        prop_assert_eq!(out.bond_dims(), report.trail.sizes());
        prop_assert!(report.max_intermediate_bond <= chi_max.max(a.max_bond()));
        let k = report.k;
        let bonds = out.bond_dims();
        for (j, &bond) in bonds.iter().enumerate() {
            let left = if j == 0 { 1 } else { bonds[j - 1] };
            prop_assert!(bond <= chi_max);
            prop_assert!(bond <= (left * d).min(k * d).max(1) || !report.iterations[j].sketched);
        }
        // Entries along the final pivot fibers are exact.
        let scale = all_indices(&a.phys_dims())
            .iter()
            .map(|i| (a.eval(i).unwrap() * b.eval(i).unwrap()).abs())
            .fold(0.0, f64::max);
        for prefix in &report.trail.sets.last().unwrap().multi {
            for s in 0..d {
                let mut idx = prefix.clone();
                idx.push(s);
                let want = a.eval(&idx).unwrap() * b.eval(&idx).unwrap();
                prop_assert!((out.eval(&idx).unwrap() - want).abs() <= 1e-12 * scale);
            }
        }
    }

    #[test]
    fn json_round_trip_is_lossless(n in 2usize..=6, d in 1usize..=4, chi in 1usize..=4, seed in 0u64..1000) {
        let a = TensorTrain::random(n, d, chi, seed).unwrap();
        let text = to_json_string(&a).unwrap();
        let b = from_json_str(&text).unwrap();
        prop_assert_eq!(b.bond_dims(), a.bond_dims());
        for j in 0..n {
            prop_assert_eq!(b.core(j).data(), a.core(j).data());
        }
        prop_assert_eq!(to_json_string(&b).unwrap(), text);
    }

    #[test]
    fn bundles_are_deterministic(n in 3usize..=6, d in 1usize..=3, chi in 1usize..=4, k in 1usize..=8, seed in 0u64..1000) {
        let a = TensorTrain::random(n, d, chi, seed).unwrap();
        let x = SketchBundle::new(&a, k, seed).unwrap();
        let y = SketchBundle::new(&a, k, seed).unwrap();
        for site in 2..n {
            prop_assert_eq!(x.sketch_mat(site), y.sketch_mat(site));
            prop_assert_eq!(x.sketched_core(site), y.sketched_core(site));
        }
    }
}

#[test]
fn complete_pivoting_can_grow_the_remainder() {
    // Sylvester-Hadamard matrix of order 4: the largest remaining entry goes
    // 2 after one pivot, 2 after two, 4 after three.
    let h = Matrix::from_vec(
        4,
        4,
        vec![1., 1., 1., 1., 1., -1., 1., -1., 1., 1., -1., -1., 1., -1., -1., 1.],
    );
    let errs: Vec<f64> = (1..=4).map(|chi| prrlu_row_id(&h, chi, 0.0).unwrap().local_error).collect();
    assert_eq!(errs, vec![2.0, 2.0, 4.0, 0.0]);
}

#[test]
fn exact_ranks_are_recovered() {
    let mut ok = 0;
    for seed in 0..20u64 {
        let (a, b) = pair(6, 2, 2, 100 + seed);
        let truth = hadamard_direct(&a, &b).unwrap();
        let cfg = RsiConfig::new(4).with_eps_id(1e-14).with_seed(seed);
        match rsi_hadamard(&[a, b], &cfg) {
            Ok(r) => {
                let e = relative_error(&r.output, &truth).unwrap();
                if e <= 1e-9 {
                    ok += 1;
                } else {
                    assert!(r.rank_deficiency_flagged(), "seed {seed}: error {e:e} without a diagnostic");
                }
            }
            Err(e) => assert!(matches!(e, rsi_core::TtError::DegenerateSketch { .. }), "{e}"),
        }
    }
    assert!(ok >= 18, "{ok}/20");
}

#[test]
fn sketch_reveals_the_column_space() {
    let d = 3;
    for r in 2..=5usize {
        let k = r + 2;
        for seed in 0..20u64 {
            let tt = TensorTrain::random_with_dims(&[d; 6], r, 500 + seed).unwrap();
            assert_eq!(tt.bond_dims()[1], r);
            let bundle = SketchBundle::new(&tt, k, seed).unwrap();
            let s = bundle.sketch_mat(2);
            let (c0, c1) = (tt.core(0), tt.core(1));
            let sketched = DMatrix::<f64>::from_fn(d * d, k, |row, kappa| {
                let (s0, s1) = (row / d, row % d);
                (0..c1.right())
                    .map(|beta| {
                        let head: f64 = (0..c0.right()).map(|a| c0.get(0, s0, a) * c1.get(a, s1, beta)).sum();
                        head * s.get(beta, kappa)
                    })
                    .sum()
            });
            let sv = sketched.svd(false, false).singular_values;
            let top: f64 = sv.max();
            let rank = sv.iter().filter(|&&x| x > 1e-10 * top).count();
            assert!(rank >= r, "r {r} seed {seed}: rank {rank}");
        }
    }
}
