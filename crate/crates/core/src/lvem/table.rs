use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::models::ModelBank;

/// `log p(x_j | speaker k, keyword l)` for every frame and cell, laid out
/// `[(j * M + k) * N + l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogLikTable {
    data: Vec<f64>,
    frames: usize,
    speakers: usize,
    keywords: usize,
}

impl LogLikTable {
    pub fn new(data: Vec<f64>, frames: usize, speakers: usize, keywords: usize) -> Result<Self> {
        if frames == 0 || speakers == 0 || keywords == 0 {
            return Err(Error::InvalidArgument("empty log-likelihood table".into()));
        }
        if data.len() != frames * speakers * keywords {
            return Err(Error::InvalidArgument(format!(
                "table has {} entries, expected {}",
                data.len(),
                frames * speakers * keywords
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("log-likelihood table"));
        }
        Ok(Self {
            data,
            frames,
            speakers,
            keywords,
        })
    }

    pub fn from_fn(
        frames: usize,
        speakers: usize,
        keywords: usize,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(frames * speakers * keywords);
        for j in 0..frames {
            for k in 0..speakers {
                for l in 0..keywords {
                    data.push(f(j, k, l));
                }
            }
        }
        Self::new(data, frames, speakers, keywords)
    }

    pub fn frames(&self) -> usize {
        self.frames
    }

    pub fn speakers(&self) -> usize {
        self.speakers
    }

    pub fn keywords(&self) -> usize {
        self.keywords
    }

    pub fn get(&self, frame: usize, speaker: usize, keyword: usize) -> f64 {
        self.data[(frame * self.speakers + speaker) * self.keywords + keyword]
    }

    /// The `M * N` entries of one frame.
    pub fn frame(&self, j: usize) -> &[f64] {
        let w = self.speakers * self.keywords;
        &self.data[j * w..(j + 1) * w]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Adds `offset` to every entry (scales every density by `exp(offset)`).
    pub fn shifted(&self, offset: f64) -> Result<Self> {
        Self::new(
            self.data.iter().map(|v| v + offset).collect(),
            self.frames,
            self.speakers,
            self.keywords,
        )
    }
}

/// Evaluates every bank model on every frame, in parallel over frames.
pub fn frame_loglik_table(x: &FeatureMatrix, bank: &ModelBank) -> Result<LogLikTable> {
    if x.dim() != bank.dim() {
        return Err(Error::DimensionMismatch {
            expected: bank.dim(),
            actual: x.dim(),
        });
    }
    let (m, n) = (bank.n_speakers(), bank.n_keywords());
    let mut data = vec![0.0; x.frames() * m * n];
    data.par_chunks_mut(m * n)
        .zip(x.as_slice().par_chunks(x.dim()))
        .for_each(|(row, frame)| {
            for (slot, model) in row.iter_mut().zip(bank.models()) {
                *slot = model.log_pdf_unchecked(frame);
            }
        });
    LogLikTable::new(data, x.frames(), m, n)
}
