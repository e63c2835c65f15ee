//! Binary sidecar for warm-up ICI CDFs.
//!
//! Layout, little endian:
//!
//! ```text
//! magic   8 bytes  "ZFHCDF01"
//! cells   u32
//! users   u32      per cell
//! repeat cells * users times, cell-major:
//!   n       u64    sample count
//!   values  n * f64, sorted ascending
//! ```

use std::io::{Read, Write};
use std::path::Path;

use super::cdf::EmpiricalCdf;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"ZFHCDF01";

/// Per-cell, per-user ICI CDFs, indexed `[cell][user]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CdfSet {
    pub cdfs: Vec<Vec<EmpiricalCdf<f64>>>,
}

impl CdfSet {
    pub fn cells(&self) -> usize {
        self.cdfs.len()
    }

    pub fn users(&self) -> usize {
        self.cdfs.first().map_or(0, |c| c.len())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(MAGIC)?;
        w.write_all(&(self.cells() as u32).to_le_bytes())?;
        w.write_all(&(self.users() as u32).to_le_bytes())?;
        for cell in &self.cdfs {
            for cdf in cell {
                w.write_all(&(cdf.len() as u64).to_le_bytes())?;
                for x in cdf.samples() {
                    w.write_all(&x.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let corrupt = |inv: &str| Error::Corrupt {
            what: "CDF sidecar".into(),
            invariant: inv.into(),
        };
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic).map_err(|_| corrupt("magic header"))?;
        if &magic != MAGIC {
            return Err(corrupt("magic header"));
        }
        let mut u32buf = [0u8; 4];
        let mut u64buf = [0u8; 8];
        r.read_exact(&mut u32buf).map_err(|_| corrupt("cell count present"))?;
        let cells = u32::from_le_bytes(u32buf) as usize;
        r.read_exact(&mut u32buf).map_err(|_| corrupt("user count present"))?;
        let users = u32::from_le_bytes(u32buf) as usize;
        let mut cdfs = Vec::with_capacity(cells);
        for _ in 0..cells {
            let mut row = Vec::with_capacity(users);
            for _ in 0..users {
                r.read_exact(&mut u64buf).map_err(|_| corrupt("sample count present"))?;
                let n = u64::from_le_bytes(u64buf) as usize;
                let mut values = Vec::with_capacity(n.min(1 << 24));
                for _ in 0..n {
                    r.read_exact(&mut u64buf).map_err(|_| corrupt("sample count matches payload"))?;
                    values.push(f64::from_le_bytes(u64buf));
                }
                row.push(EmpiricalCdf::from_sorted(values).map_err(|e| match e {
                    Error::Corrupt { invariant, .. } => corrupt(&invariant),
                    other => other,
                })?);
            }
            cdfs.push(row);
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(corrupt("no trailing bytes"));
        }
        Ok(Self { cdfs })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = std::io::BufWriter::new(file);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}
