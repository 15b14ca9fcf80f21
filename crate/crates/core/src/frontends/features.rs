//! Frame-by-dimension feature container and its binary/CSV encodings.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::scalar::Real;

const FEATURE_MAGIC: &[u8; 4] = b"FEA1";

/// Row-major `frames x dims` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix<T> {
    frames: usize,
    dims: usize,
    data: Vec<T>,
}

impl<T: Real> FeatureMatrix<T> {
    pub fn new(frames: usize, dims: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != frames * dims {
            return Err(Error::DimensionMismatch { expected: frames * dims, found: data.len() });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix".into()));
        }
        Ok(Self { frames, dims, data })
    }

    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self> {
        let dims = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != dims) {
            return Err(Error::DimensionMismatch { expected: dims, found: bad.len() });
        }
        Self::new(rows.len(), dims, rows.concat())
    }

    pub fn zeros(frames: usize, dims: usize) -> Self {
        Self { frames, dims, data: vec![T::zero(); frames * dims] }
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, t: usize) -> &[T] {
        &self.data[t * self.dims..(t + 1) * self.dims]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [T] {
        &mut self.data[t * self.dims..(t + 1) * self.dims]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.data.chunks_exact(self.dims.max(1)).take(self.frames)
    }

    /// Column-wise concatenation of matrices with equal frame counts.
    pub fn hstack(parts: &[&Self]) -> Result<Self> {
        let frames = parts.first().map_or(0, |p| p.frames);
        if let Some(bad) = parts.iter().find(|p| p.frames != frames) {
            return Err(Error::DimensionMismatch { expected: frames, found: bad.frames });
        }
        let dims: usize = parts.iter().map(|p| p.dims).sum();
        let mut data = Vec::with_capacity(frames * dims);
        for t in 0..frames {
            for p in parts {
                data.extend_from_slice(p.row(t));
            }
        }
        Ok(Self { frames, dims, data })
    }

    /// Row-wise concatenation (frame pooling).
    pub fn vstack<'a>(parts: impl IntoIterator<Item = &'a Self>) -> Result<Self> {
        let mut dims = None;
        let mut frames = 0;
        let mut data = Vec::new();
        for p in parts {
            match dims {
                None => dims = Some(p.dims),
                Some(d) if d != p.dims => return Err(Error::DimensionMismatch { expected: d, found: p.dims }),
                _ => {}
            }
            frames += p.frames;
            data.extend_from_slice(&p.data);
        }
        Ok(Self { frames, dims: dims.unwrap_or(0), data })
    }

    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(FEATURE_MAGIC)?;
        w.write_all(&u32_of(self.frames)?.to_le_bytes())?;
        w.write_all(&u32_of(self.dims)?.to_le_bytes())?;
        for v in &self.data {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.data.len());
        self.write_binary(&mut out).expect("in-memory write");
        out
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != FEATURE_MAGIC {
            return Err(Error::Format("bad feature magic".into()));
        }
        let frames = read_u32(&mut r)? as usize;
        let dims = read_u32(&mut r)? as usize;
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes)?;
        if bytes.len() != frames * dims * 8 {
            return Err(Error::Format(format!("payload of {} bytes, header declares {frames}x{dims}", bytes.len())));
        }
        let data =
            bytes.chunks_exact(8).map(|c| T::lit(f64::from_le_bytes(c.try_into().expect("8-byte chunk")))).collect();
        Self::new(frames, dims, data)
    }

    /// Debug dump: header `c0,c1,...` then one row per frame.
    pub fn to_csv(&self) -> String {
        let mut out = (0..self.dims).map(|d| format!("c{d}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{:?}", v.as_f64())).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

pub(crate) fn u32_of(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Format(format!("{n} exceeds u32 header field")))
}

pub(crate) fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}
