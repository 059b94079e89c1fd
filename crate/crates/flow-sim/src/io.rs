use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::field::SpectralField;
use crate::SimError;

pub const MAGIC: &[u8; 7] = b"STGLAB1";

/// Snapshot header: magic, `N`, period, time and field count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub n: usize,
    pub period: f64,
    pub time: f64,
    pub fields: usize,
}

/// Writes `fields` (each `N²` grid values, `y` slow) after the header. Layout:
/// 7-byte magic, `N` as u64, period and time as f64, field count as u64,
/// then the values, all little-endian.
pub fn write_snapshot(path: &Path, header: &SnapshotHeader, fields: &[Vec<f64>]) -> Result<(), SimError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&(header.n as u64).to_le_bytes())?;
    w.write_all(&header.period.to_le_bytes())?;
    w.write_all(&header.time.to_le_bytes())?;
    w.write_all(&(fields.len() as u64).to_le_bytes())?;
    for f in fields {
        if f.len() != header.n * header.n {
            return Err(SimError::Format(format!("field of length {} for N = {}", f.len(), header.n)));
        }
        for v in f {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, Vec<Vec<f64>>), SimError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SimError::Format("bad magic".into()));
    }
    let mut b8 = [0u8; 8];
    let mut next = |r: &mut BufReader<File>| -> Result<[u8; 8], SimError> {
        r.read_exact(&mut b8)?;
        Ok(b8)
    };
    let n = u64::from_le_bytes(next(&mut r)?) as usize;
    let period = f64::from_le_bytes(next(&mut r)?);
    let time = f64::from_le_bytes(next(&mut r)?);
    let count = u64::from_le_bytes(next(&mut r)?) as usize;
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let mut f = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            f.push(f64::from_le_bytes(next(&mut r)?));
        }
        fields.push(f);
    }
    Ok((SnapshotHeader { n, period, time, fields: count }, fields))
}

pub fn write_field(path: &Path, f: &SpectralField) -> Result<(), SimError> {
    let h = SnapshotHeader {
        n: f.n,
        period: f.period,
        time: f.time,
        fields: 1,
    };
    write_snapshot(path, &h, &[f.to_grid()])
}

pub fn read_field(path: &Path) -> Result<SpectralField, SimError> {
    let (h, fields) = read_snapshot(path)?;
    let v = fields.first().ok_or_else(|| SimError::Format("no fields".into()))?;
    Ok(SpectralField::from_grid(v, h.n, h.period, h.time).0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndexEntry {
    pub path: PathBuf,
    pub time: f64,
}

/// Snapshot index, stored as JSON next to the snapshots.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SnapshotIndex {
    pub n: usize,
    pub period: f64,
    pub delta: f64,
    pub snapshots: Vec<IndexEntry>,
}

impl SnapshotIndex {
    pub fn save(&self, path: &Path) -> Result<(), SimError> {
        let s = serde_json::to_string_pretty(self).map_err(|e| SimError::Format(e.to_string()))?;
        std::fs::write(path, s)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        let s = std::fs::read_to_string(path)?;
        serde_json::from_str(&s).map_err(|e| SimError::Format(e.to_string()))
    }

    /// Loads every listed snapshot; relative paths resolve against `dir`.
    pub fn load_fields(&self, dir: &Path) -> Result<Vec<SpectralField>, SimError> {
        self.snapshots.iter().map(|e| read_field(&dir.join(&e.path))).collect()
    }
}
