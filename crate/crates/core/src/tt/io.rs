//! JSON file format:
//! `{"version": 1, "phys_dims": [..], "bond_dims": [..], "cores": [[..], ..]}`
//! with each core flattened row-major in `(left, phys, right)` order.

use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{Core, TensorTrain};
use crate::error::{Result, TtError};

const FORMAT_VERSION: u32 = 1;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TtFile {
    version: u32,
    phys_dims: Vec<usize>,
    bond_dims: Vec<usize>,
    cores: Vec<Vec<f64>>,
}

/// Serializes with 17 significant digits per value so that reading the
/// file back reproduces every core bit for bit.
pub fn to_json_string(tt: &TensorTrain) -> Result<String> {
    tt.check_finite()?;
    let join = |v: &[usize]| {
        v.iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(", ")
    };
    let mut out = String::new();
    out.push_str("{\n");
    let _ = writeln!(out, "  \"version\": {FORMAT_VERSION},");
    let _ = writeln!(out, "  \"phys_dims\": [{}],", join(&tt.phys_dims()));
    let _ = writeln!(out, "  \"bond_dims\": [{}],", join(&tt.bond_dims()));
    out.push_str("  \"cores\": [\n");
    for (j, c) in tt.cores().iter().enumerate() {
        out.push_str("    [");
        for (i, x) in c.data().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            let _ = write!(out, "{x:.16e}");
        }
        out.push(']');
        if j + 1 < tt.order() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("  ]\n}\n");
    Ok(out)
}

pub fn from_json_str(text: &str) -> Result<TensorTrain> {
    let file: TtFile =
        serde_json::from_str(text).map_err(|e| TtError::Format(e.to_string()))?;
    if file.version != FORMAT_VERSION {
        return Err(TtError::Format(format!(
            "unsupported version {}, expected {FORMAT_VERSION}",
            file.version
        )));
    }
    let n = file.phys_dims.len();
    if n < 2 || file.bond_dims.len() + 1 != n || file.cores.len() != n {
        return Err(TtError::Format(format!(
            "inconsistent lengths: {n} physical dims, {} bonds, {} cores",
            file.bond_dims.len(),
            file.cores.len()
        )));
    }
    let mut cores = Vec::with_capacity(n);
    for (j, data) in file.cores.into_iter().enumerate() {
        if let Some(p) = data.iter().position(|x| !x.is_finite()) {
            return Err(TtError::Format(format!("core {j} value {p} is not finite")));
        }
        let l = if j == 0 { 1 } else { file.bond_dims[j - 1] };
        let r = if j + 1 == n { 1 } else { file.bond_dims[j] };
        cores.push(
            Core::new(l, file.phys_dims[j], r, data)
                .map_err(|e| TtError::Format(format!("core {j}: {e}")))?,
        );
    }
    TensorTrain::new(cores).map_err(|e| TtError::Format(e.to_string()))
}

pub fn write_json(tt: &TensorTrain, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, to_json_string(tt)?)?;
    Ok(())
}

pub fn read_json(path: impl AsRef<Path>) -> Result<TensorTrain> {
    from_json_str(&std::fs::read_to_string(path)?)
}
