//! Computes the 38-dimensional front-end features for a synthetic utterance.
//!
//! `cargo run --example mfcc_features`

use spkw::features::{compute_features, MfccConfig};
use spkw::mixer::{synth_waveform_corpus, SynthConfig};

fn main() -> spkw::Result<()> {
    let corpus = synth_waveform_corpus(&SynthConfig {
        speakers: 2,
        keywords: 2,
        reps: 1,
        ..Default::default()
    })?;
    let cfg = MfccConfig::default();
    for ((k, l), cell) in corpus.iter_cells() {
        let audio = &cell[0];
        let x = compute_features(audio, &cfg)?;
        println!(
            "{} says {}: {} samples at {} Hz -> D={} T={}",
            corpus.speakers()[k],
            corpus.keywords()[l],
            audio.samples().len(),
            audio.sample_rate(),
            x.dim(),
            x.frames()
        );
        let first: Vec<String> = x.frame(0)[..4].iter().map(|v| format!("{v:.3}")).collect();
        println!("  first frame starts with [{}]", first.join(", "));
    }
    Ok(())
}
