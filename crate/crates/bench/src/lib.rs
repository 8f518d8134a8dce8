//! Experiment harness for sketched tensor-train products: seeded
//! parameter sweeps comparing the sketched method against exact Kronecker
//! products with rounding, written as CSV or JSON records.

pub mod error;
pub mod experiments;
pub mod product;
pub mod record;
pub mod stats;

pub use error::{exit_code, BenchError, Result};
pub use experiments::{Outcome, RunSettings};
pub use record::{read_csv, write_csv, Envelope, ExperimentRecord, Method, CSV_HEADER};
