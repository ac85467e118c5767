//! Utterances grouped by (speaker, keyword) cell.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `M x N` grid of utterance lists with speaker and keyword labels.
/// Cells are stored row-major (speaker-major).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus<T> {
    speakers: Vec<String>,
    keywords: Vec<String>,
    cells: Vec<Vec<T>>,
}

impl<T> Corpus<T> {
    pub fn new(speakers: Vec<String>, keywords: Vec<String>, cells: Vec<Vec<T>>) -> Result<Self> {
        if speakers.is_empty() || keywords.is_empty() {
            return Err(Error::Empty("speaker or keyword labels"));
        }
        if cells.len() != speakers.len() * keywords.len() {
            return Err(Error::InvalidArgument(format!(
                "{} cells for a {}x{} grid",
                cells.len(),
                speakers.len(),
                keywords.len()
            )));
        }
        Ok(Self {
            speakers,
            keywords,
            cells,
        })
    }

    pub fn speakers(&self) -> &[String] {
        &self.speakers
    }

    pub fn keywords(&self) -> &[String] {
        &self.keywords
    }

    pub fn n_speakers(&self) -> usize {
        self.speakers.len()
    }

    pub fn n_keywords(&self) -> usize {
        self.keywords.len()
    }

    pub fn cell(&self, speaker: usize, keyword: usize) -> &[T] {
        &self.cells[speaker * self.keywords.len() + keyword]
    }

    /// Cells in row-major order with their `(speaker, keyword)` indices.
    pub fn iter_cells(&self) -> impl Iterator<Item = ((usize, usize), &[T])> + '_ {
        let n = self.keywords.len();
        self.cells
            .iter()
            .enumerate()
            .map(move |(i, c)| ((i / n, i % n), c.as_slice()))
    }

    pub fn cells(&self) -> &[Vec<T>] {
        &self.cells
    }

    /// Smallest number of utterances in any cell.
    pub fn min_reps(&self) -> usize {
        self.cells.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Corpus<U> {
        Corpus {
            speakers: self.speakers.clone(),
            keywords: self.keywords.clone(),
            cells: self
                .cells
                .iter()
                .map(|c| c.iter().map(&mut f).collect())
                .collect(),
        }
    }

    pub fn try_map<U>(&self, mut f: impl FnMut(&T) -> Result<U>) -> Result<Corpus<U>> {
        let cells = self
            .cells
            .iter()
            .map(|c| c.iter().map(&mut f).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Corpus {
            speakers: self.speakers.clone(),
            keywords: self.keywords.clone(),
            cells,
        })
    }

    /// Errors on the first empty cell, naming it.
    pub fn require_nonempty(&self, needed: usize) -> Result<()> {
        for ((k, l), c) in self.iter_cells() {
            if c.is_empty() {
                return Err(Error::MissingCell {
                    speaker: self.speakers[k].clone(),
                    keyword: self.keywords[l].clone(),
                });
            }
            if c.len() < needed {
                return Err(Error::CellTooSmall {
                    speaker: self.speakers[k].clone(),
                    keyword: self.keywords[l].clone(),
                    count: c.len(),
                    needed,
                });
            }
        }
        Ok(())
    }
}

/// Labels `S1..SM` and `K1..KN`.
pub fn default_labels(m: usize, n: usize) -> (Vec<String>, Vec<String>) {
    (
        (1..=m).map(|i| format!("S{i}")).collect(),
        (1..=n).map(|i| format!("K{i}")).collect(),
    )
}

/// One utterance file of an on-disk corpus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub speaker: String,
    pub keyword: String,
    /// Relative paths are taken relative to the manifest's directory.
    pub path: PathBuf,
}

/// JSON description of an on-disk corpus: the label sets and one entry per
/// utterance file. Repetitions within a cell keep their listing order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub speakers: Vec<String>,
    pub keywords: Vec<String>,
    pub utterances: Vec<ManifestEntry>,
}

impl CorpusManifest {
    /// Reads a manifest and makes every relative path absolute against the
    /// manifest's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut manifest: CorpusManifest = serde_json::from_str(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for u in &mut manifest.utterances {
            if u.path.is_relative() {
                u.path = base.join(&u.path);
            }
        }
        Ok(manifest)
    }

    /// Groups the entry paths by cell.
    pub fn cells(&self) -> Result<Corpus<PathBuf>> {
        let index = |labels: &[String], name: &str| {
            labels.iter().position(|l| l == name).ok_or_else(|| {
                Error::InvalidArgument(format!("manifest label {name:?} is not declared"))
            })
        };
        let n = self.keywords.len();
        let mut cells = vec![Vec::new(); self.speakers.len() * n];
        for u in &self.utterances {
            let k = index(&self.speakers, &u.speaker)?;
            let l = index(&self.keywords, &u.keyword)?;
            cells[k * n + l].push(u.path.clone());
        }
        Corpus::new(self.speakers.clone(), self.keywords.clone(), cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> CorpusManifest {
        let (speakers, keywords) = default_labels(2, 2);
        let utterances = ["S2 K1 b", "S1 K2 a", "S2 K1 a"]
            .iter()
            .map(|s| {
                let p: Vec<&str> = s.split(' ').collect();
                ManifestEntry {
                    speaker: p[0].into(),
                    keyword: p[1].into(),
                    path: PathBuf::from(p[2]),
                }
            })
            .collect();
        CorpusManifest {
            speakers,
            keywords,
            utterances,
        }
    }

    #[test]
    fn cells_keep_listing_order() {
        let c = manifest().cells().unwrap();
        assert_eq!(c.cell(1, 0), &[PathBuf::from("b"), PathBuf::from("a")]);
        assert!(c.cell(0, 0).is_empty());
        assert!(matches!(c.require_nonempty(1), Err(Error::MissingCell { .. })));
    }

    #[test]
    fn undeclared_label_is_an_error() {
        let mut m = manifest();
        m.utterances[0].speaker = "S9".into();
        assert!(m.cells().is_err());
    }

    #[test]
    fn load_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.json");
        std::fs::write(&path, serde_json::to_string(&manifest()).unwrap()).unwrap();
        let loaded = CorpusManifest::load(&path).unwrap();
        assert_eq!(loaded.utterances[0].path, dir.path().join("b"));
    }

    #[test]
    fn grid_size_is_checked() {
        let (s, k) = default_labels(2, 2);
        assert!(Corpus::new(s, k, vec![vec![1]; 3]).is_err());
        let (s, k) = default_labels(2, 3);
        let c = Corpus::new(s, k, (0..6).map(|i| vec![i; i + 1]).collect()).unwrap();
        assert_eq!(c.min_reps(), 1);
        assert_eq!(c.cell(1, 1), &[4, 4, 4, 4, 4]);
        let doubled = c.map(|v| v * 2);
        assert_eq!(doubled.cell(0, 2), &[4, 4, 4]);
    }
}
