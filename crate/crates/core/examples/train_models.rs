//! Fits Gaussian and Student-t mixtures to contaminated data and compares
//! how far each model's mean is pulled by the outliers.
//!
//! `cargo run --example train_models`

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use spkw::corpus::Corpus;
use spkw::mixer::{inject_outliers, synth_feature_corpus, SynthConfig};
use spkw::models::{train_bank, Family, TrainConfig};

fn main() -> spkw::Result<()> {
    let synth = SynthConfig {
        speakers: 2,
        keywords: 2,
        reps: 6,
        components: 1,
        seed: 4,
        ..Default::default()
    };
    let (clean, truth) = synth_feature_corpus(&synth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cells = clean.cells().to_vec();
    for x in cells.iter_mut().flatten() {
        *x = inject_outliers(x, 0.05, 30.0, &mut rng)?;
    }
    let corpus = Corpus::new(clean.speakers().to_vec(), clean.keywords().to_vec(), cells)?;

    let cfg = TrainConfig {
        n_components: 1,
        ..Default::default()
    };
    for family in [Family::Gaussian, Family::StudentT] {
        let bank = train_bank(&corpus, family, &cfg)?;
        let mut worst = 0.0f64;
        for (fitted, generator) in bank.models().iter().zip(truth.models()) {
            let (a, b) = (&fitted.components()[0].mean, &generator.components()[0].mean);
            let d = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(d);
        }
        let dof = bank.models()[0].components()[0].dof;
        println!("{family}: largest mean error {worst:.3}, dof {dof:?}");
    }
    Ok(())
}
