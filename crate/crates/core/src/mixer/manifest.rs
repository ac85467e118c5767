use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::mix::{GroundTruth, SourceRef};
use super::tasks::TaskKind;
use crate::error::Result;

/// One line of a mixture manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    /// WAV or feature file, relative to the manifest.
    pub path: String,
    pub task: TaskKind,
    /// `(speaker, keyword)` index pairs present in the mixture.
    pub truth: GroundTruth,
    /// The same pairs as labels, for readers.
    pub labels: Vec<(String, String)>,
    pub sources: [SourceRef; 2],
    /// Realized RPR in dB; absent for feature-level mixtures.
    pub rpr_db: Option<f64>,
    /// Realized overlap; absent for feature-level mixtures.
    pub overlap: Option<f64>,
    pub seed: u64,
}

pub fn write_manifest<W: Write>(mut out: W, records: &[ManifestRecord]) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n").map_err(|e| crate::error::Error::io("manifest", e))?;
    }
    Ok(())
}

pub fn read_manifest<R: BufRead>(input: R) -> Result<Vec<ManifestRecord>> {
    let mut out = Vec::new();
    for line in input.lines() {
        let line = line.map_err(|e| crate::error::Error::io("manifest", e))?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}
