use std::path::Path;

use serde::{Deserialize, Serialize};

use super::args::CommonArgs;
use crate::error::{Error, Result};
use crate::eval::{ExperimentConfig, InitCondition, OutlierConfig};
use crate::features::MfccConfig;
use crate::lvem::{DecodePolicy, EmConfig};
use crate::mixer::{SynthConfig, SynthMode, TaskSelection};
use crate::models::{Family, TrainConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MixSettings {
    pub target_rpr_db: f64,
    pub min_overlap: f64,
}

impl Default for MixSettings {
    fn default() -> Self {
        Self {
            target_rpr_db: 0.0,
            min_overlap: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalSettings {
    pub families: Vec<Family>,
    pub inits: Vec<InitCondition>,
    pub tasks: TaskSelection,
    pub folds: Option<Vec<usize>>,
    pub max_tasks: Option<usize>,
    pub train_outliers: Option<OutlierConfig>,
}

impl Default for EvalSettings {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        Self {
            families: e.families,
            inits: e.inits,
            tasks: e.tasks,
            folds: e.folds,
            max_tasks: e.max_tasks,
            train_outliers: e.train_outliers,
        }
    }
}

/// Everything a command may need. Missing fields in a config file take
/// their defaults; command-line flags are applied on top.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub mfcc: MfccConfig,
    pub family: Family,
    pub train: TrainConfig,
    pub em: EmConfig,
    pub policy: DecodePolicy,
    pub synth_mode: SynthMode,
    pub synth: SynthConfig,
    pub mix: MixSettings,
    pub eval: EvalSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mfcc: MfccConfig::default(),
            family: Family::StudentT,
            train: TrainConfig::default(),
            em: EmConfig::default(),
            policy: DecodePolicy::default(),
            synth_mode: SynthMode::Feature,
            synth: SynthConfig::default(),
            mix: MixSettings::default(),
            eval: EvalSettings::default(),
        }
    }
}

impl RunConfig {
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Defaults, overlaid by the config file, overlaid by `--seed`. The
    /// resulting global seed is copied into every seeded section.
    pub fn resolve(common: &CommonArgs) -> Result<Self> {
        let mut cfg = match &common.config {
            Some(p) => Self::from_file(p)?,
            None => Self::default(),
        };
        if let Some(seed) = common.seed {
            cfg.seed = seed;
        }
        cfg.train.seed = cfg.seed;
        cfg.synth.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            families: self.eval.families.clone(),
            inits: self.eval.inits.clone(),
            policy: self.policy,
            tasks: self.eval.tasks,
            folds: self.eval.folds.clone(),
            max_tasks: self.eval.max_tasks,
            train: self.train.clone(),
            em: self.em.clone(),
            target_rpr_db: self.mix.target_rpr_db,
            min_overlap: self.mix.min_overlap,
            train_outliers: self.eval.train_outliers,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_file_keeps_defaults_and_flag_wins() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.json");
        std::fs::write(&path, r#"{"seed": 5, "train": {"n_components": 4}}"#).unwrap();
        let mut common = CommonArgs {
            config: Some(path),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&common).unwrap();
        assert_eq!(cfg.seed, 5);
        assert_eq!(cfg.train.n_components, 4);
        assert_eq!(cfg.train.max_iters, 200);
        assert_eq!(cfg.train.seed, 5);
        assert_eq!(cfg.mfcc, MfccConfig::default());
        common.seed = Some(9);
        let cfg = RunConfig::resolve(&common).unwrap();
        assert_eq!((cfg.seed, cfg.train.seed, cfg.synth.seed), (9, 9, 9));
        assert_eq!(cfg.experiment().seed, 9);
    }

    #[test]
    fn round_trips_through_json() {
        let cfg = RunConfig::default();
        let text = serde_json::to_string_pretty(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);
    }
}
