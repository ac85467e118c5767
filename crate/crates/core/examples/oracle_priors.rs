//! Compares flat, oracle-speaker and oracle-keyword initialisations on the
//! same same-keyword mixture.
//!
//! `cargo run --example oracle_priors`

use spkw::lvem::{compute_jpm, decode, init_flat, init_oracle_keywords, init_oracle_speakers, run_em, DecodePolicy, EmConfig};
use spkw::mixer::{interleave_frames, synth_feature_corpus, SynthConfig};
use spkw::models::{train_bank, Family, TrainConfig};

fn main() -> spkw::Result<()> {
    let (corpus, _) = synth_feature_corpus(&SynthConfig {
        speakers: 4,
        keywords: 3,
        reps: 3,
        components: 3,
        seed: 12,
        ..Default::default()
    })?;
    let bank = train_bank(
        &corpus,
        Family::StudentT,
        &TrainConfig {
            n_components: 3,
            ..Default::default()
        },
    )?;
    let (m, n) = (bank.n_speakers(), bank.n_keywords());
    let x = interleave_frames(&corpus.cell(0, 2)[1], &corpus.cell(3, 2)[1])?;

    let inits = [
        ("flat", init_flat(m, n)?),
        ("oracle speakers S1,S4", init_oracle_speakers(m, n, &[0, 3])?),
        ("oracle keyword K3", init_oracle_keywords(m, n, &[2])?),
    ];
    for (name, init) in inits {
        let outcome = run_em(&x, &bank, &init, &EmConfig::default())?;
        let found = decode(&compute_jpm(&outcome.state), &outcome.state, DecodePolicy::KnownCount(2))?;
        let beta: Vec<String> = outcome.state.beta().iter().map(|b| format!("{b:.3}")).collect();
        let pairs: Vec<String> = found
            .pairs
            .iter()
            .map(|p| format!("{}/{}", bank.speakers()[p.speaker], bank.keywords()[p.keyword]))
            .collect();
        println!("{name:>22}: beta [{}] -> {}", beta.join(" "), pairs.join(", "));
    }
    Ok(())
}
