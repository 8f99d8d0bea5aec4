use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{make_grid, Field};
use crate::error::{Error, Result};

/// JSON sidecar of a field snapshot; the payload holds `n^N` little-endian `f64`
/// values in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub dim: usize,
    pub n: usize,
    pub half_extent: f64,
    pub label: String,
    pub params: serde_json::Value,
}

fn paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

pub fn encode_payload(field: &Field) -> Vec<u8> {
    field.values().iter().flat_map(|v| v.to_le_bytes()).collect()
}

/// Writes `<stem>.json` and `<stem>.bin`.
pub fn write_snapshot(field: &Field, label: &str, params: serde_json::Value, stem: &Path) -> Result<()> {
    let grid = field.grid();
    let header = SnapshotHeader {
        dim: grid.dim(),
        n: grid.points_per_axis(),
        half_extent: grid.half_extent(),
        label: label.to_string(),
        params,
    };
    let (json, bin) = paths(stem);
    let text = serde_json::to_string_pretty(&header).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(json, text + "\n")?;
    fs::write(bin, encode_payload(field))?;
    Ok(())
}

pub fn read_snapshot(stem: &Path) -> Result<(Field, SnapshotHeader)> {
    let (json, bin) = paths(stem);
    let header: SnapshotHeader =
        serde_json::from_str(&fs::read_to_string(json)?).map_err(|e| Error::Io(format!("snapshot sidecar: {e}")))?;
    let grid = make_grid(header.dim, header.n, header.half_extent)?;
    let bytes = fs::read(bin)?;
    if bytes.len() != 8 * grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), got: bytes.len() / 8 });
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((Field::new(grid, values)?, header))
}
