//! Product of two trains stored on disk.

use std::path::Path;

use rsi_core::tt::read_json;
use rsi_core::{rsi_hadamard, RsiConfig, RsiReport};

use crate::error::Result;

pub fn multiply_files(a: impl AsRef<Path>, b: impl AsRef<Path>, cfg: &RsiConfig) -> Result<RsiReport> {
    let a = read_json(a)?;
    let b = read_json(b)?;
    Ok(rsi_hadamard(&[a, b], cfg)?)
}
