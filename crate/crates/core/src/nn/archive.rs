//! Named-tensor archive.
//!
//! ```text
//! magic     8 bytes  "SNOARCH\0"
//! version   u32
//! count     u64
//! count x { name_len u32, name (utf-8), rank u32, dims u64 x rank, data f64 x prod(dims) }
//! checksum  u64      first 8 bytes of SHA-256 over everything above
//! ```
//! All integers and floats are little-endian.

use sha2::{Digest, Sha256};

use super::tensor::Tensor;
use crate::{Error, Result};

pub const ARCHIVE_MAGIC: &[u8; 8] = b"SNOARCH\0";
pub const ARCHIVE_VERSION: u32 = 1;

pub fn write_archive<'a, I>(tensors: I) -> Vec<u8>
where
    I: IntoIterator<Item = (&'a str, &'a Tensor)>,
{
    let entries: Vec<_> = tensors.into_iter().collect();
    let mut out = Vec::new();
    out.extend_from_slice(ARCHIVE_MAGIC);
    out.extend_from_slice(&ARCHIVE_VERSION.to_le_bytes());
    out.extend_from_slice(&(entries.len() as u64).to_le_bytes());
    for (name, t) in entries {
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name.as_bytes());
        out.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
        for &d in t.shape() {
            out.extend_from_slice(&(d as u64).to_le_bytes());
        }
        for v in t.data() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let sum = checksum(&out);
    out.extend_from_slice(&sum.to_le_bytes());
    out
}

pub(crate) fn checksum(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn read_archive(bytes: &[u8]) -> Result<Vec<(String, Tensor)>> {
    if bytes.len() < ARCHIVE_MAGIC.len() {
        return Err(Error::Checksum("archive truncated before magic".into()));
    }
    if &bytes[..8] != ARCHIVE_MAGIC {
        return Err(Error::Format("not a tensor archive (bad magic)".into()));
    }
    if bytes.len() < 8 + 4 + 8 + 8 {
        return Err(Error::Checksum("archive truncated".into()));
    }
    let (body, trailer) = bytes.split_at(bytes.len() - 8);
    let stored = u64::from_le_bytes(trailer.try_into().expect("8 bytes"));
    if stored != checksum(body) {
        return Err(Error::Checksum("checksum mismatch (truncated or corrupt)".into()));
    }
    let mut r = Reader { buf: body, pos: 8 };
    let version = r.u32()?;
    if version != ARCHIVE_VERSION {
        return Err(Error::Format(format!(
            "archive version {version}, reader supports {ARCHIVE_VERSION}"
        )));
    }
    let count = r.u64()? as usize;
    let mut out = Vec::new();
    for _ in 0..count {
        let name_len = r.u32()? as usize;
        let name = std::str::from_utf8(r.take(name_len)?)
            .map_err(|_| Error::Format("tensor name is not utf-8".into()))?
            .to_owned();
        let rank = r.u32()? as usize;
        let mut shape = Vec::with_capacity(rank);
        for _ in 0..rank {
            shape.push(r.u64()? as usize);
        }
        let n: usize = shape.iter().product();
        let raw = r.take(n.checked_mul(8).ok_or_else(|| Error::Format("tensor too large".into()))?)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect();
        out.push((name, Tensor::from_vec(&shape, data)?));
    }
    if r.pos != body.len() {
        return Err(Error::Format(format!("{} trailing bytes", body.len() - r.pos)));
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        match end {
            Some(end) => {
                let s = &self.buf[self.pos..end];
                self.pos = end;
                Ok(s)
            }
            None => Err(Error::Format("archive body shorter than declared".into())),
        }
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}
