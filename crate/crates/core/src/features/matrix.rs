use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

pub const FEATURE_MAGIC: &[u8; 4] = b"LVF1";

/// A `dim x frames` feature matrix stored frame by frame (column-major), so
/// each frame is a contiguous slice.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    data: Vec<f64>,
    dim: usize,
    frames: usize,
}

impl FeatureMatrix {
    pub fn new(data: Vec<f64>, dim: usize, frames: usize) -> Result<Self> {
        if dim == 0 || frames == 0 {
            return Err(Error::InvalidArgument(format!(
                "feature matrix must be non-empty, got {dim}x{frames}"
            )));
        }
        if data.len() != dim * frames {
            return Err(Error::InvalidArgument(format!(
                "feature data has {} values, expected {}",
                data.len(),
                dim * frames
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        Ok(Self { data, dim, frames })
    }

    pub fn from_frames(frames: &[Vec<f64>]) -> Result<Self> {
        let dim = frames.first().map(Vec::len).unwrap_or(0);
        if let Some(bad) = frames.iter().find(|f| f.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.len(),
            });
        }
        Self::new(frames.concat(), dim, frames.len())
    }

    /// Concatenates frames of several matrices with the same dimension.
    pub fn concat(parts: &[&FeatureMatrix]) -> Result<Self> {
        let first = parts.first().ok_or(Error::Empty("feature matrices"))?;
        let mut data = Vec::new();
        for p in parts {
            if p.dim != first.dim {
                return Err(Error::DimensionMismatch {
                    expected: first.dim,
                    actual: p.dim,
                });
            }
            data.extend_from_slice(&p.data);
        }
        let frames = data.len() / first.dim;
        Ok(Self {
            data,
            dim: first.dim,
            frames,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn frame(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn iter_frames(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn get(&self, row: usize, frame: usize) -> f64 {
        self.data[frame * self.dim + row]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(12 + 8 * self.data.len());
        out.extend_from_slice(FEATURE_MAGIC);
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        out.extend_from_slice(&(self.frames as u32).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 12 || &bytes[..4] != FEATURE_MAGIC {
            return Err(Error::FeatureFormat("missing LVF1 magic".into()));
        }
        let dim = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
        let frames = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let body = &bytes[12..];
        if body.len() != dim * frames * 8 {
            return Err(Error::FeatureFormat(format!(
                "expected {} payload bytes for {dim}x{frames}, found {}",
                dim * frames * 8,
                body.len()
            )));
        }
        let data = body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(data, dim, frames)
    }
}

pub fn write_feature_file(path: impl AsRef<Path>, features: &FeatureMatrix) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&features.to_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
    let path = path.as_ref();
    let mut buf = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut buf))
        .map_err(|e| Error::io(path, e))?;
    FeatureMatrix::from_bytes(&buf)
}
