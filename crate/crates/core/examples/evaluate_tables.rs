//! Runs a small leave-one-out experiment and prints the result tables.
//!
//! `cargo run --release --example evaluate_tables`

use spkw::eval::{run_experiment, ExperimentConfig, ExperimentCorpus};
use spkw::mixer::{synth_feature_corpus, SynthConfig};

fn main() -> spkw::Result<()> {
    let (corpus, _) = synth_feature_corpus(&SynthConfig {
        speakers: 3,
        keywords: 3,
        reps: 4,
        components: 3,
        seed: 21,
        ..Default::default()
    })?;
    let mut cfg = ExperimentConfig {
        folds: Some(vec![0, 1]),
        seed: 5,
        ..Default::default()
    };
    cfg.train.n_components = 3;
    let report = run_experiment(&ExperimentCorpus::Features(corpus), &cfg)?;
    print!("{}", report.to_text());
    println!("{} mixtures scored", report.utterances.len());
    Ok(())
}
