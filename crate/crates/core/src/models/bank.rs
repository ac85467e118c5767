use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{train_mixture, Family, MixtureModel, TrainConfig};
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::math::derive_seed;

/// One trained density per (speaker, keyword) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BankRepr", into = "BankRepr")]
pub struct ModelBank {
    family: Family,
    dim: usize,
    speakers: Vec<String>,
    keywords: Vec<String>,
    models: Vec<MixtureModel>,
    train_config: Option<TrainConfig>,
}

#[derive(Serialize, Deserialize)]
struct BankRepr {
    family: Family,
    dim: usize,
    speakers: Vec<String>,
    keywords: Vec<String>,
    #[serde(default)]
    train_config: Option<TrainConfig>,
    /// `models[k][l]`.
    models: Vec<Vec<MixtureModel>>,
}

impl TryFrom<BankRepr> for ModelBank {
    type Error = Error;

    fn try_from(r: BankRepr) -> Result<Self> {
        let bank = ModelBank::new(r.speakers, r.keywords, r.models)?;
        if bank.family != r.family || bank.dim != r.dim {
            return Err(Error::InvalidArgument(
                "bank header disagrees with its models".into(),
            ));
        }
        Ok(bank.with_train_config(r.train_config))
    }
}

impl From<ModelBank> for BankRepr {
    fn from(b: ModelBank) -> Self {
        let n = b.keywords.len();
        let mut rows = Vec::with_capacity(b.speakers.len());
        let mut it = b.models.into_iter();
        for _ in 0..b.speakers.len() {
            rows.push(it.by_ref().take(n).collect());
        }
        Self {
            family: b.family,
            dim: b.dim,
            speakers: b.speakers,
            keywords: b.keywords,
            train_config: b.train_config,
            models: rows,
        }
    }
}

impl ModelBank {
    /// `models[k][l]` is the model for speaker `k` uttering keyword `l`.
    pub fn new(
        speakers: Vec<String>,
        keywords: Vec<String>,
        models: Vec<Vec<MixtureModel>>,
    ) -> Result<Self> {
        if speakers.is_empty() || keywords.is_empty() {
            return Err(Error::Empty("bank labels"));
        }
        if models.len() != speakers.len() || models.iter().any(|r| r.len() != keywords.len()) {
            return Err(Error::InvalidArgument(format!(
                "model grid is not {}x{}",
                speakers.len(),
                keywords.len()
            )));
        }
        let flat: Vec<MixtureModel> = models.into_iter().flatten().collect();
        let (family, dim) = (flat[0].family(), flat[0].dim());
        for m in &flat {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: m.dim(),
                });
            }
            if m.family() != family {
                return Err(Error::InvalidArgument("bank mixes model families".into()));
            }
        }
        Ok(Self {
            family,
            dim,
            speakers,
            keywords,
            models: flat,
            train_config: None,
        })
    }

    pub fn with_train_config(mut self, cfg: Option<TrainConfig>) -> Self {
        self.train_config = cfg;
        self
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
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

    pub fn train_config(&self) -> Option<&TrainConfig> {
        self.train_config.as_ref()
    }

    pub fn model(&self, speaker: usize, keyword: usize) -> &MixtureModel {
        &self.models[speaker * self.keywords.len() + keyword]
    }

    /// Row-major models, speaker-major.
    pub fn models(&self) -> &[MixtureModel] {
        &self.models
    }

    /// Bank whose speaker `i` is this bank's speaker `perm[i]`.
    pub fn permute_speakers(&self, perm: &[usize]) -> Result<Self> {
        let m = self.speakers.len();
        let mut seen = vec![false; m];
        if perm.len() != m || perm.iter().any(|&p| p >= m || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument("not a permutation of the speakers".into()));
        }
        let n = self.keywords.len();
        let models = perm
            .iter()
            .flat_map(|&p| self.models[p * n..(p + 1) * n].iter().cloned())
            .collect();
        Ok(Self {
            speakers: perm.iter().map(|&p| self.speakers[p].clone()).collect(),
            models,
            ..self.clone()
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

/// Fits one mixture per cell on the cell's concatenated frames. Cells are
/// fitted in parallel, each with its own seed derived from `cfg.seed`.
pub fn train_bank(
    corpus: &Corpus<FeatureMatrix>,
    family: Family,
    cfg: &TrainConfig,
) -> Result<ModelBank> {
    cfg.validate()?;
    corpus.require_nonempty(1)?;
    let dim = corpus.cells()[0][0].dim();
    for c in corpus.cells() {
        if let Some(bad) = c.iter().find(|f| f.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: bad.dim(),
            });
        }
    }
    let models = corpus
        .cells()
        .par_iter()
        .enumerate()
        .map(|(i, utts)| {
            let parts: Vec<&FeatureMatrix> = utts.iter().collect();
            let frames = FeatureMatrix::concat(&parts)?;
            let cell_cfg = TrainConfig {
                seed: derive_seed(cfg.seed, i as u64),
                ..cfg.clone()
            };
            train_mixture(&frames, family, &cell_cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    let n = corpus.n_keywords();
    let mut grid = Vec::with_capacity(corpus.n_speakers());
    let mut it = models.into_iter();
    for _ in 0..corpus.n_speakers() {
        grid.push(it.by_ref().take(n).collect());
    }
    Ok(ModelBank::new(corpus.speakers().to_vec(), corpus.keywords().to_vec(), grid)?
        .with_train_config(Some(cfg.clone())))
}
