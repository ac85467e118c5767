use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::score::{aggregate, score_utterance, MetricRow, UtteranceScore};
use super::split::loo_split;
use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::features::{compute_features, AudioSignal, FeatureMatrix, MfccConfig};
use crate::lvem::{compute_jpm, decode, frame_loglik_table, run_em_on_table, DecodePolicy, EmConfig, InitKind};
use crate::math::derive_seed;
use crate::mixer::{enumerate_tasks, inject_outliers, interleave_frames, mix, GroundTruth, TaskKind, TaskSelection, TaskSpec};
use crate::models::{train_bank, Family, ModelBank, TrainConfig};

/// How EM is started for each test mixture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitCondition {
    Flat,
    /// The true speakers are given.
    OracleSpeakers,
    /// The true keywords are given.
    OracleKeywords,
}

impl InitCondition {
    pub const ALL: [InitCondition; 3] = [
        InitCondition::Flat,
        InitCondition::OracleSpeakers,
        InitCondition::OracleKeywords,
    ];

    pub fn label(self) -> &'static str {
        match self {
            InitCondition::Flat => "flat",
            InitCondition::OracleSpeakers => "oracle-spid",
            InitCondition::OracleKeywords => "oracle-kwid",
        }
    }

    pub fn init_kind(self, truth: &GroundTruth) -> InitKind {
        match self {
            InitCondition::Flat => InitKind::Flat,
            InitCondition::OracleSpeakers => InitKind::OracleSpeakers(truth.speakers()),
            InitCondition::OracleKeywords => {
                let mut spoken = truth.keywords();
                spoken.sort_unstable();
                spoken.dedup();
                InitKind::OracleKeywords(spoken)
            }
        }
    }
}

impl fmt::Display for InitCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for InitCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "flat" => Ok(InitCondition::Flat),
            "oracle-spid" | "oracle-speakers" | "oracle_speakers" | "spid" => Ok(InitCondition::OracleSpeakers),
            "oracle-kwid" | "oracle-keywords" | "oracle_keywords" | "kwid" => Ok(InitCondition::OracleKeywords),
            _ => Err(Error::InvalidArgument(format!("unknown init condition {s:?}"))),
        }
    }
}

/// Corrupts a share of every training utterance's frames before fitting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutlierConfig {
    pub fraction: f64,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub families: Vec<Family>,
    pub inits: Vec<InitCondition>,
    pub policy: DecodePolicy,
    pub tasks: TaskSelection,
    /// Held-out repetition indices; every repetition when absent.
    pub folds: Option<Vec<usize>>,
    /// Seeded subsample of at most this many tasks of each kind.
    pub max_tasks: Option<usize>,
    pub train: TrainConfig,
    pub em: EmConfig,
    pub target_rpr_db: f64,
    pub min_overlap: f64,
    pub train_outliers: Option<OutlierConfig>,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            families: vec![Family::StudentT, Family::Gaussian],
            inits: InitCondition::ALL.to_vec(),
            policy: DecodePolicy::default(),
            tasks: TaskSelection::All,
            folds: None,
            max_tasks: None,
            train: TrainConfig::default(),
            em: EmConfig::default(),
            target_rpr_db: 0.0,
            min_overlap: 0.9,
            train_outliers: None,
            seed: 0,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.families.is_empty() || self.inits.is_empty() {
            return Err(Error::InvalidConfig("need at least one family and one init".into()));
        }
        if self.max_tasks == Some(0) {
            return Err(Error::InvalidConfig("max_tasks must be >= 1".into()));
        }
        self.policy.validate()?;
        self.train.validate()?;
        Ok(())
    }
}

/// Task grouping of a result row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TaskGroup {
    #[serde(rename = "MSpDKW")]
    DifferentKeywords,
    #[serde(rename = "MSpSKW")]
    SameKeyword,
    /// Both task lists pooled.
    Overall,
}

impl TaskGroup {
    pub fn label(self) -> &'static str {
        match self {
            TaskGroup::DifferentKeywords => "MSpDKW",
            TaskGroup::SameKeyword => "MSpSKW",
            TaskGroup::Overall => "Overall",
        }
    }

    fn contains(self, kind: TaskKind) -> bool {
        match self {
            TaskGroup::DifferentKeywords => kind == TaskKind::DifferentKeywords,
            TaskGroup::SameKeyword => kind == TaskKind::SameKeyword,
            TaskGroup::Overall => true,
        }
    }
}

impl fmt::Display for TaskGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The corpus an experiment draws training data and test mixtures from.
#[derive(Debug, Clone)]
pub enum ExperimentCorpus {
    /// Mixtures are built by interleaving frames.
    Features(Corpus<FeatureMatrix>),
    /// Mixtures are built by adding waveforms, then featurized.
    Waveforms {
        corpus: Corpus<AudioSignal>,
        mfcc: MfccConfig,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureInfo {
    pub fold: usize,
    pub task: TaskKind,
    pub truth: GroundTruth,
    pub frames: usize,
    pub rpr_db: Option<f64>,
    pub overlap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceOutcome {
    pub fold: usize,
    pub family: Family,
    pub init: InitCondition,
    pub task: TaskKind,
    pub truth: GroundTruth,
    pub decoded: Vec<(usize, usize)>,
    pub score: UtteranceScore,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub family: Family,
    pub task: TaskGroup,
    pub init: InitCondition,
    pub metrics: MetricRow,
}

pub const CSV_HEADER: &str = "family,task,init,n_utterances,at_least_one_speaker,both_speakers,at_least_one_keyword,both_keywords,at_least_one_pair,both_pairs";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
    pub mixtures: Vec<MixtureInfo>,
    pub utterances: Vec<UtteranceOutcome>,
}

impl ExperimentReport {
    pub fn row(&self, family: Family, task: TaskGroup, init: InitCondition) -> Option<&MetricRow> {
        self.rows
            .iter()
            .find(|r| r.family == family && r.task == task && r.init == init)
            .map(|r| &r.metrics)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.family,
                r.task,
                r.init,
                m.n_utterances,
                m.at_least_one_speaker,
                m.both_speakers,
                m.at_least_one_keyword,
                m.both_keywords,
                m.at_least_one_pair,
                m.both_pairs
            );
        }
        out
    }

    /// Fixed-width table with one block per family and init condition.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<6} {:<12} {:<8} {:>6} | {:>8} {:>8} | {:>8} {:>8} | {:>8} {:>8}",
            "model", "init", "task", "n", ">=1 spk", "2 spk", ">=1 kw", "2 kw", ">=1 pair", "2 pair"
        );
        let _ = writeln!(out, "{}", "-".repeat(100));
        for r in &self.rows {
            let m = &r.metrics;
            let _ = writeln!(
                out,
                "{:<6} {:<12} {:<8} {:>6} | {:>8.2} {:>8.2} | {:>8.2} {:>8.2} | {:>8.2} {:>8.2}",
                r.family.to_string(),
                r.init.label(),
                r.task.label(),
                m.n_utterances,
                m.at_least_one_speaker,
                m.both_speakers,
                m.at_least_one_keyword,
                m.both_keywords,
                m.at_least_one_pair,
                m.both_pairs
            );
        }
        out
    }
}

/// Tasks of the selected kinds, each kind optionally subsampled.
pub fn select_tasks(m: usize, n: usize, cfg: &ExperimentConfig) -> Result<Vec<TaskSpec>> {
    let (different, same) = enumerate_tasks(m, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, u64::MAX));
    let mut out = Vec::new();
    for list in [different, same] {
        if !list.first().is_some_and(|t| cfg.tasks.includes(t.kind)) {
            continue;
        }
        match cfg.max_tasks {
            Some(cap) if cap < list.len() => {
                let mut picks = rand::seq::index::sample(&mut rng, list.len(), cap).into_vec();
                picks.sort_unstable();
                out.extend(picks.into_iter().map(|i| list[i].clone()));
            }
            _ => out.extend(list),
        }
    }
    Ok(out)
}

fn featurize(corpus: &Corpus<AudioSignal>, mfcc: &MfccConfig) -> Result<Corpus<FeatureMatrix>> {
    let cells = corpus
        .cells()
        .par_iter()
        .map(|c| c.iter().map(|a| compute_features(a, mfcc)).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    Corpus::new(corpus.speakers().to_vec(), corpus.keywords().to_vec(), cells)
}

fn corrupt(train: &Corpus<FeatureMatrix>, out: &OutlierConfig, seed: u64) -> Result<Corpus<FeatureMatrix>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    train.try_map(|x| inject_outliers(x, out.fraction, out.magnitude, &mut rng))
}

/// Leave-one-out evaluation. For each fold the held-out repetition of every
/// cell is removed, one bank per family is trained on the rest, and every
/// selected task is mixed from held-out utterances, run through EM under each
/// init condition, decoded and scored.
pub fn run_experiment(corpus: &ExperimentCorpus, cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let owned;
    let features = match corpus {
        ExperimentCorpus::Features(c) => c,
        ExperimentCorpus::Waveforms { corpus, mfcc } => {
            owned = featurize(corpus, mfcc)?;
            &owned
        }
    };
    features.require_nonempty(2)?;
    let (m, n) = (features.n_speakers(), features.n_keywords());
    let folds = cfg.folds.clone().unwrap_or_else(|| (0..features.min_reps()).collect());
    if folds.is_empty() {
        return Err(Error::InvalidConfig("no folds selected".into()));
    }
    let tasks = select_tasks(m, n, cfg)?;
    if tasks.is_empty() {
        return Err(Error::Empty("task list"));
    }

    let mut mixtures = Vec::new();
    let mut utterances = Vec::new();
    for &fold in &folds {
        let fold_seed = derive_seed(cfg.seed, fold as u64);
        let (mut train, _) = loo_split(features, fold)?;
        if let Some(out) = &cfg.train_outliers {
            train = corrupt(&train, out, derive_seed(fold_seed, 0))?;
        }
        let train_cfg = TrainConfig {
            seed: derive_seed(fold_seed, 1),
            ..cfg.train.clone()
        };
        let banks = cfg
            .families
            .iter()
            .map(|&f| train_bank(&train, f, &train_cfg))
            .collect::<Result<Vec<ModelBank>>>()?;

        let per_task = tasks
            .par_iter()
            .enumerate()
            .map(|(i, task)| {
                let seed = derive_seed(fold_seed, 2 + i as u64);
                let (x, info) = build_mixture(corpus, features, task, fold, seed, cfg)?;
                let mut outcomes = Vec::with_capacity(banks.len() * cfg.inits.len());
                for bank in &banks {
                    let table = frame_loglik_table(&x, bank)?;
                    for &init in &cfg.inits {
                        let start = init.init_kind(&task.truth).build(m, n)?;
                        let em = run_em_on_table(&table, &start, &cfg.em)?;
                        let detection = decode(&compute_jpm(&em.state), &em.state, cfg.policy)?;
                        outcomes.push(UtteranceOutcome {
                            fold,
                            family: bank.family(),
                            init,
                            task: task.kind,
                            truth: task.truth.clone(),
                            decoded: detection.pairs.iter().map(|p| (p.speaker, p.keyword)).collect(),
                            score: score_utterance(&detection, &task.truth)?,
                            iterations: em.iterations,
                        });
                    }
                }
                Ok((info, outcomes))
            })
            .collect::<Result<Vec<_>>>()?;
        for (info, outcomes) in per_task {
            mixtures.push(info);
            utterances.extend(outcomes);
        }
    }

    let kinds: Vec<TaskKind> = {
        let mut k: Vec<TaskKind> = tasks.iter().map(|t| t.kind).collect();
        k.dedup();
        k
    };
    let mut groups: Vec<TaskGroup> = kinds
        .iter()
        .map(|k| match k {
            TaskKind::DifferentKeywords => TaskGroup::DifferentKeywords,
            TaskKind::SameKeyword => TaskGroup::SameKeyword,
        })
        .collect();
    if groups.len() > 1 {
        groups.push(TaskGroup::Overall);
    }
    let mut rows = Vec::new();
    for &family in &cfg.families {
        for &init in &cfg.inits {
            for &group in &groups {
                let records: Vec<UtteranceScore> = utterances
                    .iter()
                    .filter(|u| u.family == family && u.init == init && group.contains(u.task))
                    .map(|u| u.score)
                    .collect();
                let metrics = aggregate(&records)?;
                metrics.check()?;
                rows.push(ExperimentRow {
                    family,
                    task: group,
                    init,
                    metrics,
                });
            }
        }
    }
    Ok(ExperimentReport {
        rows,
        mixtures,
        utterances,
    })
}

fn build_mixture(
    corpus: &ExperimentCorpus,
    features: &Corpus<FeatureMatrix>,
    task: &TaskSpec,
    fold: usize,
    seed: u64,
    cfg: &ExperimentConfig,
) -> Result<(FeatureMatrix, MixtureInfo)> {
    let [(ka, la), (kb, lb)] = [task.truth.pairs()[0], task.truth.pairs()[1]];
    let (x, rpr_db, overlap) = match corpus {
        ExperimentCorpus::Features(_) => (
            interleave_frames(&features.cell(ka, la)[fold], &features.cell(kb, lb)[fold])?,
            None,
            None,
        ),
        ExperimentCorpus::Waveforms { corpus, mfcc } => {
            let mut spec = task.mix_spec(fold, seed);
            spec.target_rpr_db = cfg.target_rpr_db;
            spec.min_overlap = cfg.min_overlap;
            let out = mix(&corpus.cell(ka, la)[fold], &corpus.cell(kb, lb)[fold], &spec)?;
            (compute_features(&out.signal, mfcc)?, Some(out.rpr_db), Some(out.overlap))
        }
    };
    let info = MixtureInfo {
        fold,
        task: task.kind,
        truth: task.truth.clone(),
        frames: x.frames(),
        rpr_db,
        overlap,
    };
    Ok((x, info))
}
