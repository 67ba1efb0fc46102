//! Binary blobs with JSON headers for fields and near-field matrices, CSV for tables.
//!
//! A blob is little-endian (re, im) f64 pairs; `<stem>.json` carries the
//! header and `<stem>.bin` the values.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::boundary::{NearFieldHeader, NearFieldMatrix};
use crate::error::{Error, Result};
use crate::field::{BoxGrid, ScalarField, VectorField3};
use crate::sphere::SphereGrid;
use crate::spherical::{FarFieldCoefficients, FarFieldData, HarmonicIndex};

pub fn encode_blob(values: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 16);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn decode_blob(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if bytes.len() % 16 != 0 {
        return Err(Error::Format(format!("blob length {} is not a multiple of 16", bytes.len())));
    }
    Ok(bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

/// Hex SHA-256 of raw bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of any serializable description (e.g. a potential descriptor list).
pub fn content_hash<T: Serialize>(value: &T) -> Result<String> {
    Ok(sha256_hex(&serde_json::to_vec(value)?))
}

fn stem_paths(stem: &Path) -> (PathBuf, PathBuf) {
    (stem.with_extension("json"), stem.with_extension("bin"))
}

fn write_pair<H: Serialize>(stem: &Path, header: &H, values: &[Complex64]) -> Result<Vec<PathBuf>> {
    let (h, b) = stem_paths(stem);
    fs::write(&h, serde_json::to_vec_pretty(header)?)?;
    fs::write(&b, encode_blob(values))?;
    Ok(vec![h, b])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub n: usize,
    pub half_width: f64,
    pub components: usize,
    #[serde(default)]
    pub description: Option<String>,
}

/// Components are stored one after another, each in grid index order.
pub fn write_fields(stem: &Path, fields: &[&ScalarField], description: Option<&str>) -> Result<Vec<PathBuf>> {
    let Some(first) = fields.first() else {
        return Err(Error::param("fields", "nothing to write"));
    };
    let g = *first.grid();
    if fields.iter().any(|f| f.grid() != &g) {
        return Err(Error::GridMismatch);
    }
    let header = FieldHeader {
        n: g.n(),
        half_width: g.half_width(),
        components: fields.len(),
        description: description.map(str::to_owned),
    };
    let values: Vec<Complex64> = fields.iter().flat_map(|f| f.values().iter().copied()).collect();
    write_pair(stem, &header, &values)
}

pub fn write_vector_field(stem: &Path, v: &VectorField3, description: Option<&str>) -> Result<Vec<PathBuf>> {
    write_fields(stem, &[v.component(0), v.component(1), v.component(2)], description)
}

pub fn read_fields(stem: &Path) -> Result<(FieldHeader, Vec<ScalarField>)> {
    let (h, b) = stem_paths(stem);
    let header: FieldHeader = serde_json::from_slice(&fs::read(h)?)?;
    let grid = BoxGrid::new(header.n, header.half_width)?;
    let values = decode_blob(&fs::read(b)?)?;
    if values.len() != header.components * grid.len() {
        return Err(Error::SizeMismatch {
            expected: header.components * grid.len(),
            found: values.len(),
        });
    }
    let fields = values
        .chunks_exact(grid.len())
        .map(|c| ScalarField::from_values(grid, c.to_vec()))
        .collect::<Result<_>>()?;
    Ok((header, fields))
}

pub fn write_near_field(stem: &Path, n: &NearFieldMatrix) -> Result<Vec<PathBuf>> {
    write_pair(stem, &n.header(), n.entries())
}

pub fn read_near_field(stem: &Path) -> Result<NearFieldMatrix> {
    let (h, b) = stem_paths(stem);
    let header: NearFieldHeader = serde_json::from_slice(&fs::read(h)?)?;
    let sphere = SphereGrid::from_spec(header.radius, header.sphere)?;
    let mut m = NearFieldMatrix::new(sphere, header.k, decode_blob(&fs::read(b)?)?)?;
    m.potential_hash = header.potential_hash;
    Ok(m)
}

/// Rows `l1,m1,l2,m2,re,im` over every coefficient.
pub fn far_coefficients_csv(c: &FarFieldCoefficients) -> String {
    let idx = HarmonicIndex::all(c.l_max());
    let mut s = String::from("l1,m1,l2,m2,re,im\n");
    for a in &idx {
        for b in &idx {
            let v = c.get(*a, *b);
            s.push_str(&format!("{},{},{},{},{:.15e},{:.15e}\n", a.l, a.m, b.l, b.m, v.re, v.im));
        }
    }
    s
}

/// Rows `xhat_x,xhat_y,xhat_z,d_x,d_y,d_z,re,im`.
pub fn far_field_csv(f: &FarFieldData) -> String {
    let dirs = f.directions.directions();
    let n = dirs.len();
    let mut s = String::from("xhat_x,xhat_y,xhat_z,d_x,d_y,d_z,re,im\n");
    for (i, x) in dirs.iter().enumerate() {
        for (j, d) in dirs.iter().enumerate() {
            let v = f.values[i * n + j];
            s.push_str(&format!(
                "{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
                x[0], x[1], x[2], d[0], d[1], d[2], v.re, v.im
            ));
        }
    }
    s
}
