//! Field snapshot files: raw little-endian `f64` payload plus a JSON sidecar.
//!
//! A snapshot `NAME` is a pair of files:
//!
//! * `NAME.bin` — payload, row-major over grid points (axis 0 outermost),
//!   `component_count` little-endian `f64` values per point;
//! * `NAME.json` — sidecar `{dims, extents, points, rank, component_count}`
//!   where `rank` is `"scalar"`, `"vector"`, `"spinor"`, or `"tensor3"`.
//!
//! Spinor samples are stored as `re0, im0, re1, im1`; rank-3 tensors as the
//! 27 components in row-major index order. All writes go through
//! a temp file in the destination directory followed by a rename, so a
//! snapshot is never observable half-written.

use crate::error::{Error, Result};
use crate::field::{ScalarField, SpinorField, VectorField};
use crate::grid::GridSpec;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

/// Sidecar header describing a snapshot payload.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub dims: usize,
    pub extents: Vec<f64>,
    pub points: Vec<usize>,
    pub rank: FieldRank,
    pub component_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldRank {
    Scalar,
    Vector,
    Spinor,
    Tensor3,
}

impl FieldRank {
    pub fn component_count(self) -> usize {
        match self {
            FieldRank::Scalar => 1,
            FieldRank::Vector => 3,
            FieldRank::Spinor => 4,
            FieldRank::Tensor3 => 27,
        }
    }
}

fn header_for(grid: &GridSpec, rank: FieldRank) -> SnapshotHeader {
    SnapshotHeader {
        dims: grid.dims(),
        extents: grid.active_extents(),
        points: grid.active_points(),
        rank,
        component_count: rank.component_count(),
    }
}

fn grid_from_header(h: &SnapshotHeader) -> Result<GridSpec> {
    if h.component_count != h.rank.component_count() {
        return Err(Error::SnapshotFormat(format!(
            "component_count {} does not match rank {:?}",
            h.component_count, h.rank
        )));
    }
    GridSpec::new(h.dims, &h.extents, &h.points)
}

fn bin_and_json(path: &Path) -> (PathBuf, PathBuf) {
    (path.with_extension("bin"), path.with_extension("json"))
}

/// Write `bytes` to `path` atomically (temp file + rename, same directory).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let mut tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("snapshot"),
        std::process::id()
    ));
    // Avoid clobbering a concurrent temp file with the same pid-derived name.
    let mut salt = 0u32;
    while tmp.exists() {
        salt += 1;
        tmp = dir.join(format!(
            ".{}.tmp-{}-{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("snapshot"),
            std::process::id(),
            salt
        ));
    }
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Serialize any `Serialize` value to deterministic JSON: object keys sorted,
/// pretty-printed, trailing newline.
pub fn to_sorted_json<T: Serialize>(value: &T) -> Result<String> {
    // serde_json::Value objects are BTreeMaps, so a Value round-trip sorts keys.
    let v = serde_json::to_value(value)?;
    Ok(format!("{}\n", serde_json::to_string_pretty(&v)?))
}

fn write_snapshot(path: &Path, grid: &GridSpec, rank: FieldRank, payload: &[f64]) -> Result<()> {
    let (bin, json) = bin_and_json(path);
    let mut bytes = Vec::with_capacity(payload.len() * 8);
    for v in payload {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    write_atomic(&bin, &bytes)?;
    let header = header_for(grid, rank);
    write_atomic(&json, to_sorted_json(&header)?.as_bytes())?;
    Ok(())
}

fn read_payload(path: &Path, expected_len: usize) -> Result<Vec<f64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    if bytes.len() != expected_len * 8 {
        return Err(Error::SnapshotFormat(format!(
            "{} has {} bytes, expected {}",
            path.display(),
            bytes.len(),
            expected_len * 8
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

fn read_header(path: &Path) -> Result<SnapshotHeader> {
    let text = fs::read_to_string(path)?;
    let h: SnapshotHeader = serde_json::from_str(&text)
        .map_err(|e| Error::SnapshotFormat(format!("{}: {e}", path.display())))?;
    Ok(h)
}

pub fn write_scalar(path: &Path, f: &ScalarField) -> Result<()> {
    write_snapshot(path, &f.grid, FieldRank::Scalar, &f.data)
}

pub fn write_vector(path: &Path, v: &VectorField) -> Result<()> {
    let payload: Vec<f64> = v.data.iter().flat_map(|x| x.iter().copied()).collect();
    write_snapshot(path, &v.grid, FieldRank::Vector, &payload)
}

pub fn write_spinor(path: &Path, s: &SpinorField) -> Result<()> {
    let payload: Vec<f64> = s
        .data
        .iter()
        .flat_map(|c| [c[0].re, c[0].im, c[1].re, c[1].im])
        .collect();
    write_snapshot(path, &s.grid, FieldRank::Spinor, &payload)
}

pub fn read_scalar(path: &Path) -> Result<ScalarField> {
    let (bin, json) = bin_and_json(path);
    let h = read_header(&json)?;
    if h.rank != FieldRank::Scalar {
        return Err(Error::SnapshotFormat(format!("{:?} is not a scalar", h.rank)));
    }
    let grid = grid_from_header(&h)?;
    let data = read_payload(&bin, grid.len())?;
    Ok(ScalarField { grid, data })
}

pub fn read_vector(path: &Path) -> Result<VectorField> {
    let (bin, json) = bin_and_json(path);
    let h = read_header(&json)?;
    if h.rank != FieldRank::Vector {
        return Err(Error::SnapshotFormat(format!("{:?} is not a vector", h.rank)));
    }
    let grid = grid_from_header(&h)?;
    let flat = read_payload(&bin, grid.len() * 3)?;
    let data = flat.chunks_exact(3).map(|c| [c[0], c[1], c[2]]).collect();
    Ok(VectorField { grid, data })
}

pub fn read_spinor(path: &Path) -> Result<SpinorField> {
    let (bin, json) = bin_and_json(path);
    let h = read_header(&json)?;
    if h.rank != FieldRank::Spinor {
        return Err(Error::SnapshotFormat(format!("{:?} is not a spinor", h.rank)));
    }
    let grid = grid_from_header(&h)?;
    let flat = read_payload(&bin, grid.len() * 4)?;
    let data = flat
        .chunks_exact(4)
        .map(|c| [Complex64::new(c[0], c[1]), Complex64::new(c[2], c[3])])
        .collect();
    Ok(SpinorField { grid, data })
}

/// Write a per-point rank-3 tensor (such as frame torsion coefficients),
/// 27 components per point in `data[p][i][j][k]` index order.
pub fn write_tensor3(path: &Path, grid: &GridSpec, data: &[[[[f64; 3]; 3]; 3]]) -> Result<()> {
    if data.len() != grid.len() {
        return Err(Error::SnapshotFormat(format!(
            "tensor payload has {} points, grid has {}",
            data.len(),
            grid.len()
        )));
    }
    let payload: Vec<f64> = data
        .iter()
        .flat_map(|t| t.iter().flatten().flatten().copied())
        .collect();
    write_snapshot(path, grid, FieldRank::Tensor3, &payload)
}

pub fn read_tensor3(path: &Path) -> Result<(GridSpec, Vec<[[[f64; 3]; 3]; 3]>)> {
    let (bin, json) = bin_and_json(path);
    let h = read_header(&json)?;
    if h.rank != FieldRank::Tensor3 {
        return Err(Error::SnapshotFormat(format!(
            "{:?} is not a rank-3 tensor",
            h.rank
        )));
    }
    let grid = grid_from_header(&h)?;
    let flat = read_payload(&bin, grid.len() * 27)?;
    let data = flat
        .chunks_exact(27)
        .map(|c| {
            let mut t = [[[0.0; 3]; 3]; 3];
            for (w, v) in t.iter_mut().flatten().flatten().zip(c) {
                *w = *v;
            }
            t
        })
        .collect();
    Ok((grid, data))
}

/// Identify the rank stored at `path` (for dynamic readers).
pub fn peek_rank(path: &Path) -> Result<FieldRank> {
    let (_, json) = bin_and_json(path);
    Ok(read_header(&json)?.rank)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn scalar_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(2, &[2.0 * PI, 1.0], &[8, 12]).unwrap();
        let f = ScalarField::from_fn(&g, |p| (p[0] * 3.1).sin() + p[1]);
        let path = dir.path().join("rho");
        write_scalar(&path, &f).unwrap();
        let back = read_scalar(&path).unwrap();
        assert_eq!(back.grid, g);
        assert_eq!(back.data, f.data);
    }

    #[test]
    fn spinor_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(1, &[2.0 * PI], &[16]).unwrap();
        let psi = SpinorField::from_fn(&g, |p| {
            [
                Complex64::new(p[0].cos(), p[0].sin()),
                Complex64::new(0.3, -0.7 * p[0]),
            ]
        });
        let path = dir.path().join("psi");
        write_spinor(&path, &psi).unwrap();
        let back = read_spinor(&path).unwrap();
        assert_eq!(back.data, psi.data);
    }

    #[test]
    fn tensor3_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(1, &[2.0 * PI], &[8]).unwrap();
        let data: Vec<[[[f64; 3]; 3]; 3]> = (0..g.len())
            .map(|p| {
                let mut t = [[[0.0; 3]; 3]; 3];
                for i in 0..3 {
                    for j in 0..3 {
                        for k in 0..3 {
                            t[i][j][k] = (p * 100 + i * 9 + j * 3 + k) as f64 * 0.37;
                        }
                    }
                }
                t
            })
            .collect();
        let path = dir.path().join("torsion");
        write_tensor3(&path, &g, &data).unwrap();
        let (grid, back) = read_tensor3(&path).unwrap();
        assert_eq!(grid, g);
        assert_eq!(back, data);
        assert!(read_vector(&path).is_err());
    }

    #[test]
    fn header_is_sorted_json_with_expected_keys() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(1, &[1.0], &[8]).unwrap();
        let v = VectorField::zeros(&g);
        let path = dir.path().join("field");
        write_vector(&path, &v).unwrap();
        let text = std::fs::read_to_string(path.with_extension("json")).unwrap();
        let keys: Vec<&str> = text
            .lines()
            .filter_map(|l| l.trim().strip_prefix('"'))
            .filter_map(|l| l.split('"').next())
            .collect();
        assert_eq!(
            keys,
            ["component_count", "dims", "extents", "points", "rank"]
        );
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(1, &[1.0], &[8]).unwrap();
        let f = ScalarField::zeros(&g);
        let path = dir.path().join("bad");
        write_scalar(&path, &f).unwrap();
        std::fs::write(path.with_extension("bin"), [0u8; 24]).unwrap();
        assert!(matches!(
            read_scalar(&path),
            Err(Error::SnapshotFormat(_))
        ));
    }

    #[test]
    fn rank_mismatch_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let g = GridSpec::new(1, &[1.0], &[8]).unwrap();
        write_scalar(&dir.path().join("s"), &ScalarField::zeros(&g)).unwrap();
        assert!(read_vector(&dir.path().join("s")).is_err());
        assert_eq!(peek_rank(&dir.path().join("s")).unwrap(), FieldRank::Scalar);
    }
}
