//! Result records and their CSV / JSON encodings.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

/// Column order of the CSV output.
pub const CSV_HEADER: &str = "experiment,method,n,d,chi_in,chi_out,k,p,eps_id,seed,rel_error,z_dev,t_sketch_ns,t_iter_ns,t_kron_ns,t_round_ns";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rsi,
    Direct,
}

/// One measurement: a method at one parameter point and seed.
///
/// Quantities that do not apply to a method (sketch size for the direct
/// product, Kronecker time for sketched runs) are `None` and encode as
/// empty CSV cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub experiment: String,
    pub method: Method,
    pub n: usize,
    pub d: usize,
    pub chi_in: usize,
    pub chi_out: usize,
    pub k: Option<usize>,
    pub p: Option<usize>,
    pub eps_id: Option<f64>,
    pub seed: u64,
    pub rel_error: Option<f64>,
    pub z_dev: Option<f64>,
    pub t_sketch_ns: Option<u64>,
    pub t_iter_ns: Option<u64>,
    pub t_kron_ns: Option<u64>,
    pub t_round_ns: Option<u64>,
}

impl ExperimentRecord {
    /// Record with every optional field empty.
    pub fn new(experiment: &str, method: Method, n: usize, d: usize, chi_in: usize, chi_out: usize, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            method,
            n,
            d,
            chi_in,
            chi_out,
            k: None,
            p: None,
            eps_id: None,
            seed,
            rel_error: None,
            z_dev: None,
            t_sketch_ns: None,
            t_iter_ns: None,
            t_kron_ns: None,
            t_round_ns: None,
        }
    }

    /// Sum of all recorded phase times.
    pub fn total_ns(&self) -> u64 {
        [self.t_sketch_ns, self.t_iter_ns, self.t_kron_ns, self.t_round_ns]
            .iter()
            .flatten()
            .sum()
    }
}

pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(BenchError::Format(format!("unexpected CSV header {:?}", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(BenchError::from)).collect()
}

/// JSON output: run metadata plus the records.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub experiment: String,
    /// Seconds since the Unix epoch when the run finished.
    pub timestamp: u64,
    /// False when parameter points ran concurrently.
    pub timings_trusted: bool,
    #[serde(default, skip_serializing_if = "serde_json::Map::is_empty")]
    pub summary: serde_json::Map<String, serde_json::Value>,
    pub records: Vec<ExperimentRecord>,
}

impl Envelope {
    pub fn new(experiment: &str, records: Vec<ExperimentRecord>, timings_trusted: bool) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        Self {
            experiment: experiment.to_string(),
            timestamp,
            timings_trusted,
            summary: serde_json::Map::new(),
            records,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_matches_field_order() {
        let rec = ExperimentRecord::new("x", Method::Rsi, 4, 2, 3, 5, 7);
        let mut buf = Vec::new();
        csv::Writer::from_writer(&mut buf).serialize(&rec).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
    }

    #[test]
    fn empty_cells_for_missing_values() {
        let rec = ExperimentRecord::new("x", Method::Direct, 4, 2, 3, 5, 7);
        let mut buf = Vec::new();
        write_csv(&[rec], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "x,direct,4,2,3,5,,,,7,,,,,,");
    }

    #[test]
    fn bad_header_is_rejected() {
        let text = "experiment,method\nx,rsi\n";
        assert!(matches!(read_csv(text.as_bytes()), Err(BenchError::Format(_))));
    }
}
