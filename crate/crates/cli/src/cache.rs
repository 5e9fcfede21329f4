//! On-disk memo of class group invariant factors, keyed by discriminant.
//!
//! File `classgroups.bin` inside `$D4_CACHE_DIR`, all integers little-endian:
//!
//! ```text
//! magic    4 bytes  "D4CG"
//! version  u32      1
//! count    u64
//! count × entry:
//!   d        i64
//!   n        u8      number of invariant factors of Cl(d)
//!   n × u64
//!   m        u8      number of invariant factors of Cl+(d)
//!   m × u64
//! ```
//!
//! A file with another magic or version is ignored and rewritten.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

const MAGIC: &[u8; 4] = b"D4CG";
const VERSION: u32 = 1;
const FILE: &str = "classgroups.bin";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factors {
    pub ordinary: Vec<u64>,
    pub narrow: Vec<u64>,
}

#[derive(Debug, Default)]
pub struct ClassGroupCache {
    path: Option<PathBuf>,
    entries: BTreeMap<i64, Factors>,
    dirty: bool,
}

struct Cursor<'a>(&'a [u8]);

impl Cursor<'_> {
    fn take<const N: usize>(&mut self) -> Option<[u8; N]> {
        let (h, t) = self.0.split_at_checked(N)?;
        self.0 = t;
        h.try_into().ok()
    }
    fn u8(&mut self) -> Option<u8> {
        self.take::<1>().map(|b| b[0])
    }
    fn u32(&mut self) -> Option<u32> {
        self.take().map(u32::from_le_bytes)
    }
    fn u64(&mut self) -> Option<u64> {
        self.take().map(u64::from_le_bytes)
    }
    fn i64(&mut self) -> Option<i64> {
        self.take().map(i64::from_le_bytes)
    }
    fn list(&mut self) -> Option<Vec<u64>> {
        let n = self.u8()?;
        (0..n).map(|_| self.u64()).collect()
    }
}

pub fn decode(bytes: &[u8]) -> Option<BTreeMap<i64, Factors>> {
    let mut c = Cursor(bytes);
    if &c.take::<4>()? != MAGIC || c.u32()? != VERSION {
        return None;
    }
    let n = c.u64()?;
    let mut m = BTreeMap::new();
    for _ in 0..n {
        let d = c.i64()?;
        let ordinary = c.list()?;
        let narrow = c.list()?;
        m.insert(d, Factors { ordinary, narrow });
    }
    c.0.is_empty().then_some(m)
}

pub fn encode(entries: &BTreeMap<i64, Factors>) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
    for (d, f) in entries {
        out.extend_from_slice(&d.to_le_bytes());
        for list in [&f.ordinary, &f.narrow] {
            out.push(list.len() as u8);
            for x in list {
                out.extend_from_slice(&x.to_le_bytes());
            }
        }
    }
    out
}

impl ClassGroupCache {
    /// Opens the cache under `dir`, or an in-memory cache when `dir` is None.
    pub fn open(dir: Option<&Path>) -> Result<Self> {
        let Some(dir) = dir else { return Ok(Self::default()) };
        let path = dir.join(FILE);
        let entries = match fs::read(&path) {
            Ok(bytes) => decode(&bytes).unwrap_or_default(),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => BTreeMap::new(),
            Err(e) => return Err(e).with_context(|| format!("reading {}", path.display())),
        };
        Ok(ClassGroupCache { path: Some(path), entries, dirty: false })
    }

    pub fn get_or_compute(&mut self, d: i64) -> Result<&Factors> {
        if !self.entries.contains_key(&d) {
            let g = d4core::quadfield::class_group(d)?;
            self.entries.insert(d, Factors { ordinary: g.cyclic_factors, narrow: g.narrow_cyclic_factors });
            self.dirty = true;
        }
        Ok(&self.entries[&d])
    }

    pub fn save(&mut self) -> Result<()> {
        let Some(path) = &self.path else { return Ok(()) };
        if !self.dirty {
            return Ok(());
        }
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, encode(&self.entries))?;
        fs::rename(&tmp, path)?;
        self.dirty = false;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_decode() {
        let mut m = BTreeMap::new();
        m.insert(-39, Factors { ordinary: vec![4], narrow: vec![4] });
        m.insert(12, Factors { ordinary: vec![], narrow: vec![2] });
        let bytes = encode(&m);
        assert_eq!(&bytes[..4], b"D4CG");
        assert_eq!(decode(&bytes), Some(m));
        assert_eq!(decode(&bytes[..bytes.len() - 1]), None);
        let mut other = bytes.clone();
        other[4] = 9;
        assert_eq!(decode(&other), None);
    }
}
