//! Enumerates the two-speaker tasks and mixes a few synthetic waveforms at a
//! chosen power ratio.
//!
//! `cargo run --example mix_waveforms`

use spkw::mixer::{enumerate_tasks, mix, synth_waveform_corpus, SynthConfig};

fn main() -> spkw::Result<()> {
    let corpus = synth_waveform_corpus(&SynthConfig {
        speakers: 4,
        keywords: 3,
        reps: 1,
        ..Default::default()
    })?;
    let (different, same) = enumerate_tasks(4, 3)?;
    println!("{} different-keyword and {} same-keyword tasks", different.len(), same.len());

    for (i, task) in different.iter().take(3).chain(same.iter().take(2)).enumerate() {
        let mut spec = task.mix_spec(0, 100 + i as u64);
        spec.target_rpr_db = -6.0;
        let (a, b) = (spec.source_a, spec.source_b);
        let out = mix(&corpus.cell(a.speaker, a.keyword)[0], &corpus.cell(b.speaker, b.keyword)[0], &spec)?;
        println!(
            "{} {:?}: {} samples, RPR {:.2} dB, overlap {:.3}, offset {}",
            task.kind.label(),
            out.truth.pairs(),
            out.signal.samples().len(),
            out.rpr_db,
            out.overlap,
            out.offset_b
        );
    }
    Ok(())
}
