//! End-to-end checks of the `ttbench` binary and the experiment drivers.

use std::path::PathBuf;
use std::process::{Command, Output};

use rsi_core::tt::{hadamard_direct, read_json, relative_error, write_json};
use rsi_core::{rsi_hadamard, RsiConfig, TensorTrain};
use serde_json::Value;
use ttbench::experiments::{
    exp_gaussian, exp_oscillatory, exp_relu, hzz_from_probabilities, GaussianParams, GaussianVariant,
    OscillatoryParams, ReluParams,
};
use ttbench::stats::{increases, median};
use ttbench::{read_csv, write_csv, ExperimentRecord, Method, RunSettings, CSV_HEADER};

fn ttbench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttbench"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ttbench-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn settings(seeds: u64) -> RunSettings {
    RunSettings {
        seeds: (0..seeds).collect(),
        ..RunSettings::default()
    }
}

/// Median RSI error per output bond dimension, in list order.
fn median_curve(records: &[ExperimentRecord], chi_out: &[usize]) -> Vec<f64> {
    chi_out
        .iter()
        .map(|&chi| {
            let errs: Vec<f64> = records
                .iter()
                .filter(|r| r.method == Method::Rsi && r.chi_out == chi)
                .filter_map(|r| r.rel_error)
                .collect();
            median(&errs).unwrap()
        })
        .collect()
}

const SMALL_PSI: &[&str] = &["psi2", "--n", "6", "--chi-in", "3", "--chi-max", "2,9", "--seeds", "2"];

#[test]
fn successful_run_exits_zero_with_csv() {
    let out = ttbench(SMALL_PSI);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let records = read_csv(text.as_bytes()).unwrap();
    // Two seeds of the sketched method and one direct run per bond dimension.
    assert_eq!(records.iter().filter(|r| r.method == Method::Rsi).count(), 4);
    assert_eq!(records.iter().filter(|r| r.method == Method::Direct).count(), 4);
    assert!(records.iter().all(|r| r.rel_error.is_some() && r.z_dev.is_some()));
}

#[test]
fn bad_configuration_exits_two() {
    for args in [
        &["psi2", "--bogus"][..],
        &["psi2", "--n", "4", "--chi-max", "0"],
        &["gaussian", "--variant", "nope", "--chi-max", "4"],
        &["scaling", "--oversample", "1,2"],
        &["product", "--chi-max", "4", "/nonexistent/a.json", "/nonexistent/b.json"],
    ] {
        let out = ttbench(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn mismatched_product_inputs_exit_two() {
    let a = scratch("short.json");
    let b = scratch("long.json");
    write_json(&TensorTrain::random(3, 2, 2, 1).unwrap(), &a).unwrap();
    write_json(&TensorTrain::random(4, 2, 2, 2).unwrap(), &b).unwrap();
    let out = ttbench(&["product", "--chi-max", "4", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_failure_exits_three() {
    let out = ttbench(&["relu", "--sigma", "0", "--nbits", "6", "--chi-max", "5", "--seeds", "1"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn csv_round_trip_is_exact() {
    let out = ttbench(SMALL_PSI);
    let records = read_csv(out.stdout.as_slice()).unwrap();
    let mut again = Vec::new();
    write_csv(&records, &mut again).unwrap();
    assert_eq!(again, out.stdout);
    assert_eq!(read_csv(again.as_slice()).unwrap(), records);
}

#[test]
fn json_envelope_has_all_fields() {
    let path = scratch("envelope.json");
    let mut args = SMALL_PSI.to_vec();
    args.extend(["--format", "json", "--parallel", "--out", path.to_str().unwrap()]);
    let out = ttbench(&args);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["experiment"], "psi2");
    assert!(v["timestamp"].is_u64());
    assert_eq!(v["timings_trusted"], false);
    assert!(v["summary"].is_object());
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 8);
    let fields: Vec<&str> = CSV_HEADER.split(',').collect();
    for r in records {
        let keys: Vec<&str> = r.as_object().unwrap().keys().map(String::as_str).collect();
        for f in &fields {
            assert!(keys.contains(f), "missing {f}");
        }
    }
}

#[test]
fn runs_are_reproducible() {
    let columns = |out: Output| -> Vec<(Option<u64>, Option<u64>)> {
        read_csv(out.stdout.as_slice())
            .unwrap()
            .iter()
            .map(|r| (r.rel_error.map(f64::to_bits), r.z_dev.map(f64::to_bits)))
            .collect()
    };
    assert_eq!(columns(ttbench(SMALL_PSI)), columns(ttbench(SMALL_PSI)));
}

#[test]
fn product_command_multiplies_files() {
    let (a, b) = (TensorTrain::random(6, 2, 3, 11).unwrap(), TensorTrain::random(6, 2, 3, 12).unwrap());
    let (pa, pb, pc) = (scratch("a.json"), scratch("b.json"), scratch("c.json"));
    write_json(&a, &pa).unwrap();
    write_json(&b, &pb).unwrap();
    let out = ttbench(&[
        "product",
        "--chi-max",
        "9",
        "--eps-id",
        "1e-14",
        "--out",
        pc.to_str().unwrap(),
        pa.to_str().unwrap(),
        pb.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let c = read_json(&pc).unwrap();
    assert!(relative_error(&c, &hadamard_direct(&a, &b).unwrap()).unwrap() <= 1e-10);
}

#[test]
fn squared_polarized_state_has_full_correlation() {
    let n = 8;
    let up: Vec<Vec<f64>> = (0..n).map(|_| vec![1.0, 0.0, 0.0]).collect();
    let psi = TensorTrain::rank_one(&up).unwrap();
    let report = rsi_hadamard(&[psi.clone(), psi], &RsiConfig::new(4)).unwrap();
    assert!((hzz_from_probabilities(&report.output) - (n - 1) as f64).abs() <= 1e-12);
}

#[test]
fn narrow_bump_errors_decrease() {
    let params = GaussianParams {
        n_bits: 14,
        ..GaussianParams::new(GaussianVariant::Spike)
    };
    let out = exp_gaussian(&params, &settings(3)).unwrap();
    let curve = median_curve(&out.records, &params.chi_out);
    assert_eq!(increases(&curve, 1e-12), 0, "{curve:?}");
}

#[test]
fn relu_errors_mostly_decrease() {
    let params = ReluParams {
        n_bits: 10,
        ..ReluParams::default()
    };
    let out = exp_relu(&params, &settings(3)).unwrap();
    let curve = median_curve(&out.records, &params.chi_out);
    assert!(increases(&curve, 0.0) <= 1, "{curve:?}");
}

#[test]
fn direct_oscillatory_product_is_accurate_at_large_cap() {
    let params = OscillatoryParams {
        n_bits: 12,
        chi_out: vec![40],
        oversample: vec![5],
        ..OscillatoryParams::default()
    };
    let out = exp_oscillatory(&params, &settings(1)).unwrap();
    let direct: Vec<f64> = out
        .records
        .iter()
        .filter(|r| r.method == Method::Direct)
        .map(|r| r.rel_error.unwrap())
        .collect();
    assert!(!direct.is_empty());
    assert!(direct.iter().all(|&e| e <= 1e-8), "{direct:?}");
}
