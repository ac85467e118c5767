//! Evaluation mixtures and synthetic corpora.
//!
//! Waveform mixtures add two utterances at a controlled relative power ratio
//! (RPR) with a guaranteed temporal overlap. Feature-level mixtures
//! interleave frames. [`enumerate_tasks`] lists the two-speaker task grid and
//! [`synth_corpus`] produces corpora for exercising the whole pipeline.

mod manifest;
mod mix;
mod synth;
mod tasks;

pub use manifest::{read_manifest, write_manifest, ManifestRecord};
pub use mix::{compute_rpr, mix, overlap_fraction, GroundTruth, MixOutcome, MixSpec, SourceRef, PEAK_TARGET};
pub use synth::{
    inject_outliers, interleave_frames, synth_bank, synth_corpus, synth_feature_corpus,
    synth_waveform_corpus, SynthConfig, SynthCorpus, SynthMode,
};
pub use tasks::{enumerate_tasks, TaskKind, TaskSelection, TaskSpec};
