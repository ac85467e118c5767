//! Trains a model bank, builds a two-speaker mixture and recovers who said
//! which keyword from a flat start.
//!
//! `cargo run --example detect_speakers_keywords`

use spkw::lvem::{compute_jpm, decode, init_flat, run_em, DecodePolicy, EmConfig};
use spkw::mixer::{interleave_frames, synth_feature_corpus, SynthConfig};
use spkw::models::{train_bank, Family, TrainConfig};

fn main() -> spkw::Result<()> {
    let (corpus, _) = synth_feature_corpus(&SynthConfig {
        speakers: 5,
        keywords: 4,
        reps: 3,
        components: 4,
        seed: 1,
        ..Default::default()
    })?;
    let cfg = TrainConfig {
        n_components: 4,
        ..Default::default()
    };
    let bank = train_bank(&corpus, Family::StudentT, &cfg)?;

    let x = interleave_frames(&corpus.cell(1, 3)[0], &corpus.cell(4, 0)[0])?;
    println!("mixture of S2/K4 and S5/K1 with {} frames", x.frames());

    let init = init_flat(bank.n_speakers(), bank.n_keywords())?;
    let outcome = run_em(&x, &bank, &init, &EmConfig::default())?;
    println!("EM stopped after {} iterations (converged: {})", outcome.iterations, outcome.converged);

    let jpm = compute_jpm(&outcome.state);
    for policy in [DecodePolicy::KnownCount(2), DecodePolicy::Threshold(0.2)] {
        let found = decode(&jpm, &outcome.state, policy)?;
        let pairs: Vec<String> = found
            .pairs
            .iter()
            .map(|p| format!("{}/{} ({:.3})", bank.speakers()[p.speaker], bank.keywords()[p.keyword], p.score))
            .collect();
        println!("{policy}: {}", pairs.join(", "));
    }
    Ok(())
}
