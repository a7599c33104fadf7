//! Binary weight files.
//!
//! ```text
//! magic      8 bytes  "QRMLPWTS"
//! version    u32 LE
//! n_sizes    u32 LE
//! sizes      n_sizes × u32 LE
//! n_params   u64 LE
//! params     n_params × f64 LE (flat layout of `Mlp`)
//! ```

use std::path::Path;

use super::{Mlp, QnetError};

pub const MAGIC: &[u8; 8] = b"QRMLPWTS";
pub const FORMAT_VERSION: u32 = 1;

impl Mlp {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 4 * self.sizes.len() + 8 * self.params.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.sizes.len() as u32).to_le_bytes());
        for &s in &self.sizes {
            out.extend_from_slice(&(s as u32).to_le_bytes());
        }
        out.extend_from_slice(&(self.params.len() as u64).to_le_bytes());
        for p in &self.params {
            out.extend_from_slice(&p.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, QnetError> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(8)? != MAGIC {
            return Err(QnetError::Format("bad magic".into()));
        }
        let version = cur.u32()?;
        if version != FORMAT_VERSION {
            return Err(QnetError::Format(format!("unsupported version {version}")));
        }
        let n_sizes = cur.u32()? as usize;
        if !(2..=64).contains(&n_sizes) {
            return Err(QnetError::Format(format!("implausible layer count {n_sizes}")));
        }
        let sizes = (0..n_sizes).map(|_| cur.u32().map(|s| s as usize)).collect::<Result<Vec<_>, _>>()?;
        let n_params = cur.u64()? as usize;
        if n_params.checked_mul(8).is_none_or(|b| b != bytes.len() - cur.pos) {
            return Err(QnetError::Format("parameter block length does not match header".into()));
        }
        let params = (0..n_params).map(|_| cur.f64()).collect::<Result<Vec<_>, _>>()?;
        Self::from_parameters(&sizes, params)
    }

    pub fn save(&self, path: &Path) -> Result<(), QnetError> {
        std::fs::write(path, self.to_bytes()).map_err(|e| QnetError::Io { path: path.display().to_string(), source: e })
    }

    pub fn load(path: &Path) -> Result<Self, QnetError> {
        let bytes = std::fs::read(path).map_err(|e| QnetError::Io { path: path.display().to_string(), source: e })?;
        Self::from_bytes(&bytes)
    }

    /// Loads a file and checks it has the given architecture.
    pub fn load_with_architecture(path: &Path, sizes: &[usize]) -> Result<Self, QnetError> {
        let net = Self::load(path)?;
        if net.sizes != sizes {
            return Err(QnetError::Architecture { expected: sizes.to_vec(), found: net.sizes });
        }
        Ok(net)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], QnetError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| QnetError::Format("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, QnetError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64, QnetError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, QnetError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
