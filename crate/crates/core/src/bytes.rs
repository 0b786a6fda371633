//! Little-endian binary encoding helpers shared by the model, language-model,
//! and embedding-cache file formats.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub(crate) struct BinWriter<W: Write> {
    inner: W,
}

impl<W: Write> BinWriter<W> {
    pub fn new(inner: W) -> Self {
        BinWriter { inner }
    }

    pub fn u32(&mut self, v: u32) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn u64(&mut self, v: u64) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn f64(&mut self, v: f64) -> std::io::Result<()> {
        self.inner.write_all(&v.to_le_bytes())
    }

    pub fn f64_slice(&mut self, vs: &[f64]) -> std::io::Result<()> {
        for &v in vs {
            self.f64(v)?;
        }
        Ok(())
    }

    pub fn str(&mut self, s: &str) -> std::io::Result<()> {
        self.u32(s.len() as u32)?;
        self.inner.write_all(s.as_bytes())
    }
}

pub(crate) struct BinReader<R: Read> {
    inner: R,
    path: std::path::PathBuf,
}

impl<R: Read> BinReader<R> {
    pub fn new(inner: R, path: &Path) -> Self {
        BinReader {
            inner,
            path: path.to_path_buf(),
        }
    }

    fn fill(&mut self, buf: &mut [u8]) -> Result<()> {
        self.inner
            .read_exact(buf)
            .map_err(|e| Error::io(&self.path, e))
    }

    pub fn corrupt(&self, message: impl Into<String>) -> Error {
        Error::CorruptFile {
            path: self.path.clone(),
            message: message.into(),
        }
    }

    pub fn u32(&mut self) -> Result<u32> {
        let mut b = [0u8; 4];
        self.fill(&mut b)?;
        Ok(u32::from_le_bytes(b))
    }

    pub fn u64(&mut self) -> Result<u64> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(u64::from_le_bytes(b))
    }

    pub fn f64(&mut self) -> Result<f64> {
        let mut b = [0u8; 8];
        self.fill(&mut b)?;
        Ok(f64::from_le_bytes(b))
    }

    pub fn f64_vec(&mut self, n: usize) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            out.push(self.f64()?);
        }
        Ok(out)
    }

    pub fn str(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        if len > 1 << 24 {
            return Err(self.corrupt(format!("string length {len} is implausible")));
        }
        let mut buf = vec![0u8; len];
        self.fill(&mut buf)?;
        String::from_utf8(buf).map_err(|_| self.corrupt("string is not valid UTF-8"))
    }

    /// Read and verify a 4-byte magic tag.
    pub fn expect_magic(&mut self, magic: &[u8; 4], what: &str) -> Result<()> {
        let mut b = [0u8; 4];
        self.fill(&mut b)?;
        if &b != magic {
            return Err(self.corrupt(format!("not a {what} file (bad magic bytes)")));
        }
        Ok(())
    }
}
