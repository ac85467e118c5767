//! Scoring decoded pairs against ground truth and tabulating experiments.
//!
//! Each two-speaker utterance is scored on six flags: at least one / both
//! speakers, keywords and (speaker, keyword) pairs. [`aggregate`] pools the
//! flags into percentages and [`run_experiment`] drives leave-one-out
//! evaluation over model families, task kinds and EM initializations.

mod experiment;
mod score;
mod split;

pub use experiment::{
    run_experiment, select_tasks, ExperimentConfig, ExperimentCorpus, ExperimentReport, ExperimentRow,
    InitCondition, MixtureInfo, OutlierConfig, TaskGroup, UtteranceOutcome, CSV_HEADER,
};
pub use score::{aggregate, score_utterance, MetricRow, UtteranceScore};
pub use split::loo_split;
