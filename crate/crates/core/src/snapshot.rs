//! Binary field snapshots and the JSON trajectory index.
//!
//! Snapshot layout, all little-endian:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "Q4NL"
//! 4       2     format version (1)
//! 6       2     dimension N
//! 8       4     points per axis n
//! 12      8     box length L (f64)
//! 20      1     representation (0 physical, 1 spectral)
//! 21      16·n^N  values as (re, im) f64 pairs in storage order
//! ```

use std::fs;
use std::path::{Component, Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::grid::{Field, Grid, Representation, Trajectory};
use crate::{Error, Result};

pub const MAGIC: &[u8; 4] = b"Q4NL";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 21;

pub fn encode_field(f: &Field) -> Vec<u8> {
    let g = f.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u16).to_le_bytes());
    out.extend_from_slice(&(g.points_per_axis() as u32).to_le_bytes());
    out.extend_from_slice(&g.length().to_le_bytes());
    out.push(match f.representation() {
        Representation::Physical => 0,
        Representation::Spectral => 1,
    });
    for v in f.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn read_array<const K: usize>(bytes: &[u8], at: usize) -> [u8; K] {
    bytes[at..at + K]
        .try_into()
        .expect("length checked by caller")
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Snapshot(format!(
            "{} bytes is shorter than the {HEADER_LEN}-byte header",
            bytes.len()
        )));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::Snapshot("bad magic".into()));
    }
    let version = u16::from_le_bytes(read_array(bytes, 4));
    if version != VERSION {
        return Err(Error::Snapshot(format!("unsupported version {version}")));
    }
    let dim = u16::from_le_bytes(read_array(bytes, 6)) as usize;
    let points = u32::from_le_bytes(read_array(bytes, 8)) as usize;
    let length = f64::from_le_bytes(read_array(bytes, 12));
    let repr = match bytes[20] {
        0 => Representation::Physical,
        1 => Representation::Spectral,
        other => {
            return Err(Error::Snapshot(format!(
                "unknown representation tag {other}"
            )))
        }
    };
    let grid = Grid::new(dim, points, length).map_err(|e| Error::Snapshot(e.to_string()))?;
    let expected = grid
        .len()
        .checked_mul(16)
        .and_then(|b| b.checked_add(HEADER_LEN))
        .ok_or_else(|| Error::Snapshot("payload size overflows".into()))?;
    if bytes.len() != expected {
        return Err(Error::Snapshot(format!(
            "expected {expected} bytes for {points}^{dim} values, found {}",
            bytes.len()
        )));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(read_array(c, 0)),
                f64::from_le_bytes(read_array(c, 8)),
            )
        })
        .collect();
    Field::new(grid, values, repr)
}

pub fn write_field(path: &Path, f: &Field) -> Result<()> {
    fs::write(path, encode_field(f))?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<Field> {
    decode_field(&fs::read(path)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexEntry {
    pub time: f64,
    /// Snapshot path relative to the index file's directory.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryIndex {
    pub version: u16,
    pub dim: usize,
    pub points: usize,
    pub length: f64,
    pub entries: Vec<IndexEntry>,
}

impl TrajectoryIndex {
    pub fn validate(&self) -> Result<()> {
        if self.version != VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported index version {}",
                self.version
            )));
        }
        Grid::new(self.dim, self.points, self.length)
            .map_err(|e| Error::Snapshot(e.to_string()))?;
        if self.entries.is_empty() {
            return Err(Error::Snapshot("index lists no snapshots".into()));
        }
        for w in self.entries.windows(2) {
            if !(w[1].time > w[0].time) {
                return Err(Error::Snapshot("index times must increase".into()));
            }
        }
        for e in &self.entries {
            if !e.time.is_finite() {
                return Err(Error::Snapshot("non-finite time in index".into()));
            }
            let p = Path::new(&e.path);
            let plain =
                !e.path.is_empty() && p.components().all(|c| matches!(c, Component::Normal(_)));
            if !plain {
                return Err(Error::Snapshot(format!(
                    "snapshot path {:?} must be relative and stay inside the index directory",
                    e.path
                )));
            }
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.time).collect()
    }
}

pub fn parse_index(bytes: &[u8]) -> Result<TrajectoryIndex> {
    let idx: TrajectoryIndex = serde_json::from_slice(bytes)?;
    idx.validate()?;
    Ok(idx)
}

/// Encoded snapshots `<stem>_<i>.q4nl` followed by the index `<stem>.json`,
/// as (file name, bytes) pairs.
pub fn encode_trajectory(stem: &str, traj: &Trajectory) -> Result<Vec<(String, Vec<u8>)>> {
    let g = traj.grid();
    let width = traj.len().to_string().len();
    let mut entries = Vec::with_capacity(traj.len());
    let mut files = Vec::with_capacity(traj.len() + 1);
    for (i, (t, s)) in traj.times().iter().zip(traj.states()).enumerate() {
        let name = format!("{stem}_{i:0width$}.q4nl");
        files.push((name.clone(), encode_field(s)));
        entries.push(IndexEntry {
            time: *t,
            path: name,
        });
    }
    let index = TrajectoryIndex {
        version: VERSION,
        dim: g.dim(),
        points: g.points_per_axis(),
        length: g.length(),
        entries,
    };
    files.push((format!("{stem}.json"), serde_json::to_vec_pretty(&index)?));
    Ok(files)
}

/// Write each state as `<stem>_<i>.q4nl` next to `<stem>.json`; returns the
/// index path and the snapshot paths.
pub fn write_trajectory(
    dir: &Path,
    stem: &str,
    traj: &Trajectory,
) -> Result<(PathBuf, Vec<PathBuf>)> {
    let mut files = Vec::with_capacity(traj.len());
    for (name, bytes) in encode_trajectory(stem, traj)? {
        let path = dir.join(name);
        fs::write(&path, bytes)?;
        files.push(path);
    }
    let index_path = files.pop().expect("index is always present");
    Ok((index_path, files))
}

pub fn read_trajectory(index_path: &Path) -> Result<Trajectory> {
    let idx = parse_index(&fs::read(index_path)?)?;
    let base = index_path.parent().unwrap_or_else(|| Path::new("."));
    let grid = Grid::new(idx.dim, idx.points, idx.length)?;
    let mut states = Vec::with_capacity(idx.entries.len());
    for e in &idx.entries {
        let f = read_field(&base.join(&e.path))?;
        if *f.grid() != grid {
            return Err(Error::Snapshot(format!(
                "{} is on a different grid",
                e.path
            )));
        }
        states.push(f);
    }
    Trajectory::new(idx.times(), states)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let g = Grid::new(2, 4, 3.5).unwrap();
        Field::from_physical_fn(g, |x| Complex64::new(x[0], -x[1] * 2.0))
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let f = sample();
        let bytes = encode_field(&f);
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 16);
        let back = decode_field(&bytes).unwrap();
        assert_eq!(back, f);
        assert_eq!(encode_field(&back), bytes);
        let s = f.to_spectral();
        assert_eq!(decode_field(&encode_field(&s)).unwrap(), s);
    }

    #[test]
    fn malformed_inputs() {
        let bytes = encode_field(&sample());
        assert!(decode_field(&bytes[..10]).is_err());
        assert!(decode_field(&bytes[..bytes.len() - 1]).is_err());
        let mut b = bytes.clone();
        b[0] = b'X';
        assert!(decode_field(&b).is_err());
        let mut b = bytes.clone();
        b[20] = 7;
        assert!(decode_field(&b).is_err());
        let mut b = bytes.clone();
        b[8..12].copy_from_slice(&u32::MAX.to_le_bytes());
        assert!(decode_field(&b).is_err());
        let mut b = bytes;
        b[4] = 9;
        assert!(decode_field(&b).is_err());
    }

    #[test]
    fn index_validation() {
        let good = br#"{"version":1,"dim":1,"points":8,"length":2.0,
            "entries":[{"time":0.0,"path":"a.q4nl"},{"time":0.5,"path":"b.q4nl"}]}"#;
        assert_eq!(parse_index(good).unwrap().times(), vec![0.0, 0.5]);
        let escape = br#"{"version":1,"dim":1,"points":8,"length":2.0,
            "entries":[{"time":0.0,"path":"../a.q4nl"}]}"#;
        assert!(parse_index(escape).is_err());
        let order = br#"{"version":1,"dim":1,"points":8,"length":2.0,
            "entries":[{"time":1.0,"path":"a"},{"time":0.5,"path":"b"}]}"#;
        assert!(parse_index(order).is_err());
        let extra = br#"{"version":1,"dim":1,"points":8,"length":2.0,"entries":[],"x":1}"#;
        assert!(parse_index(extra).is_err());
    }

    #[test]
    fn trajectory_files_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let f = sample();
        let tr = Trajectory::new(
            vec![0.0, 0.25],
            vec![f.clone(), f.scaled(Complex64::new(0.0, 1.0))],
        )
        .unwrap();
        let (index, files) = write_trajectory(dir.path(), "u", &tr).unwrap();
        assert_eq!(files.len(), 2);
        assert_eq!(read_trajectory(&index).unwrap(), tr);
    }
}
