use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{default_labels, Corpus};
use crate::error::{Error, Result};
use crate::features::{AudioSignal, FeatureMatrix};
use crate::math::derive_seed;
use crate::models::{Family, MixtureComponent, MixtureModel, ModelBank};

/// Settings for both synthetic corpus flavours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub speakers: usize,
    pub keywords: usize,
    /// Utterances per (speaker, keyword) cell.
    pub reps: usize,
    pub seed: u64,
    /// Feature dimension of the generating models.
    pub dim: usize,
    /// Mixture components per generating model.
    pub components: usize,
    /// Cell centres are drawn from `[-half_width, half_width]^dim`.
    pub half_width: f64,
    /// Minimum Euclidean distance between two cell centres.
    pub min_separation: f64,
    /// Standard deviation of component means around their cell centre.
    pub component_spread: f64,
    /// Per-dimension component variances are uniform in this range.
    pub var_range: [f64; 2],
    /// Frames per feature-mode utterance, inclusive range.
    pub frames: [usize; 2],
    pub sample_rate: u32,
    /// Waveform-mode utterance duration in seconds.
    pub duration: [f64; 2],
    /// Standard deviation of additive white noise in waveform mode.
    pub noise_std: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            speakers: 10,
            keywords: 10,
            reps: 10,
            seed: 0,
            dim: 5,
            components: 8,
            half_width: 5.0,
            min_separation: 3.0,
            component_spread: 0.5,
            var_range: [0.1, 0.4],
            frames: [60, 100],
            sample_rate: 16000,
            duration: [0.5, 0.8],
            noise_std: 0.003,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.speakers == 0 || self.keywords == 0 || self.reps == 0 {
            return bad("speakers, keywords and reps must be at least 1");
        }
        if self.dim == 0 || self.components == 0 {
            return bad("dim and components must be at least 1");
        }
        if !(self.half_width > 0.0) || !(self.min_separation >= 0.0) || !(self.component_spread >= 0.0) {
            return bad("half_width must be positive, separation and spread non-negative");
        }
        if !(self.var_range[0] > 0.0 && self.var_range[0] <= self.var_range[1]) {
            return bad("var_range must be positive and ordered");
        }
        if self.frames[0] == 0 || self.frames[0] > self.frames[1] {
            return bad("frames must be positive and ordered");
        }
        if self.sample_rate == 0 || !(self.duration[0] > 0.0 && self.duration[0] <= self.duration[1]) {
            return bad("sample_rate and duration must be positive, duration ordered");
        }
        if !(self.noise_std >= 0.0) {
            return bad("noise_std must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SynthMode {
    Feature,
    Waveform,
}

impl fmt::Display for SynthMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SynthMode::Feature => "feature",
            SynthMode::Waveform => "waveform",
        })
    }
}

impl FromStr for SynthMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "feature" | "features" => Ok(SynthMode::Feature),
            "waveform" | "wav" => Ok(SynthMode::Waveform),
            _ => Err(Error::InvalidArgument(format!("unknown synth mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum SynthCorpus {
    /// Sampled frames and the bank that generated them.
    Features {
        corpus: Corpus<FeatureMatrix>,
        bank: ModelBank,
    },
    Waveforms { corpus: Corpus<AudioSignal> },
}

pub fn synth_corpus(cfg: &SynthConfig, mode: SynthMode) -> Result<SynthCorpus> {
    Ok(match mode {
        SynthMode::Feature => {
            let (corpus, bank) = synth_feature_corpus(cfg)?;
            SynthCorpus::Features { corpus, bank }
        }
        SynthMode::Waveform => SynthCorpus::Waveforms {
            corpus: synth_waveform_corpus(cfg)?,
        },
    })
}

/// Random Gaussian-mixture bank with one well-separated cluster per cell.
pub fn synth_bank(cfg: &SynthConfig) -> Result<ModelBank> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, u64::MAX));
    let cells = cfg.speakers * cfg.keywords;
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(cells);
    let min_sq = cfg.min_separation * cfg.min_separation;
    while centers.len() < cells {
        let placed = (0..10_000).find_map(|_| {
            let c: Vec<f64> = (0..cfg.dim)
                .map(|_| rng.random_range(-cfg.half_width..=cfg.half_width))
                .collect();
            let clear = centers
                .iter()
                .all(|o| o.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= min_sq);
            clear.then_some(c)
        });
        match placed {
            Some(c) => centers.push(c),
            None => {
                return Err(Error::InvalidConfig(format!(
                    "cannot place {cells} cell centres {} apart in the box",
                    cfg.min_separation
                )))
            }
        }
    }
    let mut grid = Vec::with_capacity(cfg.speakers);
    let mut it = centers.into_iter();
    for _ in 0..cfg.speakers {
        let mut row = Vec::with_capacity(cfg.keywords);
        for center in it.by_ref().take(cfg.keywords) {
            let raw: Vec<f64> = (0..cfg.components).map(|_| rng.random_range(0.5..1.5)).collect();
            let total: f64 = raw.iter().sum();
            let comps = raw
                .iter()
                .map(|w| {
                    let mean = center
                        .iter()
                        .map(|c| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            c + cfg.component_spread * z
                        })
                        .collect();
                    let var = (0..cfg.dim)
                        .map(|_| rng.random_range(cfg.var_range[0]..=cfg.var_range[1]))
                        .collect();
                    MixtureComponent::gaussian(w / total, mean, var)
                })
                .collect();
            row.push(MixtureModel::new(Family::Gaussian, comps)?);
        }
        grid.push(row);
    }
    let (s, k) = default_labels(cfg.speakers, cfg.keywords);
    ModelBank::new(s, k, grid)
}

/// Samples `reps` utterances per cell from [`synth_bank`].
pub fn synth_feature_corpus(cfg: &SynthConfig) -> Result<(Corpus<FeatureMatrix>, ModelBank)> {
    let bank = synth_bank(cfg)?;
    let n = cfg.keywords;
    let cells = (0..cfg.speakers * n)
        .into_par_iter()
        .map(|cell| {
            (0..cfg.reps)
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, (cell * cfg.reps + r) as u64));
                    let frames = rng.random_range(cfg.frames[0]..=cfg.frames[1]);
                    let x = bank.model(cell / n, cell % n).sample(frames, &mut rng);
                    FeatureMatrix::from_frames(&x)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let corpus = Corpus::new(bank.speakers().to_vec(), bank.keywords().to_vec(), cells)?;
    Ok((corpus, bank))
}

const HARMONIC_AMPS: [f64; 5] = [1.0, 0.6, 0.4, 0.3, 0.2];

/// Multi-tone utterances. The speaker fixes the fundamental and hence the
/// set of partials; the keyword fixes how each partial's amplitude is
/// modulated over time. Fundamental, modulation rate, duration and phases
/// carry seeded per-utterance jitter.
pub fn synth_waveform_corpus(cfg: &SynthConfig) -> Result<Corpus<AudioSignal>> {
    cfg.validate()?;
    let n = cfg.keywords;
    let cells = (0..cfg.speakers * n)
        .into_par_iter()
        .map(|cell| {
            (0..cfg.reps)
                .map(|r| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, (cell * cfg.reps + r) as u64));
                    synth_utterance(cell / n, cell % n, cfg, &mut rng)
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let (s, k) = default_labels(cfg.speakers, cfg.keywords);
    Corpus::new(s, k, cells)
}

fn synth_utterance(speaker: usize, keyword: usize, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Result<AudioSignal> {
    let rate = cfg.sample_rate as f64;
    let f0 = 120.0 * 1.12f64.powi(speaker as i32) * (1.0 + rng.random_range(-0.02..=0.02));
    let am_rate = (1.5 + 0.9 * keyword as f64) * (1.0 + rng.random_range(-0.05..=0.05));
    let duration = rng.random_range(cfg.duration[0]..=cfg.duration[1]);
    let len = (duration * rate).round() as usize;
    let ramp = (0.03 * rate) as usize;
    let partials: Vec<(f64, f64, f64, f64)> = HARMONIC_AMPS
        .iter()
        .enumerate()
        .filter(|(h, _)| f0 * (*h as f64 + 1.0) < 0.45 * rate)
        .map(|(h, &amp)| {
            let golden = ((keyword + 1) * (h + 1)) as f64 * 0.618_033_988_75;
            let am_phase = 2.0 * PI * golden.fract();
            (f0 * (h as f64 + 1.0), amp, am_phase, rng.random_range(0.0..2.0 * PI))
        })
        .collect();
    let noise = Normal::new(0.0, cfg.noise_std.max(f64::MIN_POSITIVE)).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    let mut samples: Vec<f64> = (0..len)
        .map(|i| {
            let t = i as f64 / rate;
            let tone: f64 = partials
                .iter()
                .map(|&(f, a, am_phase, phase)| {
                    let env = 0.55 + 0.45 * (2.0 * PI * am_rate * t + am_phase).sin();
                    a * env * (2.0 * PI * f * t + phase).sin()
                })
                .sum();
            let edge = i.min(len - 1 - i);
            let fade = if edge < ramp { 0.5 - 0.5 * (PI * edge as f64 / ramp as f64).cos() } else { 1.0 };
            tone * fade
        })
        .collect();
    let peak = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for x in &mut samples {
        *x = 0.5 * *x / peak + if cfg.noise_std > 0.0 { noise.sample(rng) } else { 0.0 };
    }
    AudioSignal::new(samples, cfg.sample_rate)
}

/// Alternates frames of `a` and `b`, taking the same number from each so
/// both sources carry equal weight.
pub fn interleave_frames(a: &FeatureMatrix, b: &FeatureMatrix) -> Result<FeatureMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            actual: b.dim(),
        });
    }
    let t = a.frames().min(b.frames());
    if t == 0 {
        return Err(Error::Empty("frames to interleave"));
    }
    let mut data = Vec::with_capacity(2 * t * a.dim());
    for j in 0..t {
        data.extend_from_slice(a.frame(j));
        data.extend_from_slice(b.frame(j));
    }
    FeatureMatrix::new(data, a.dim(), 2 * t)
}

/// Replaces `round(fraction * T)` randomly chosen frames with points drawn
/// uniformly from `[-magnitude, magnitude]^D`.
pub fn inject_outliers<R: Rng + ?Sized>(
    x: &FeatureMatrix,
    fraction: f64,
    magnitude: f64,
    rng: &mut R,
) -> Result<FeatureMatrix> {
    if !(0.0..=1.0).contains(&fraction) || !(magnitude > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "outlier fraction {fraction} or magnitude {magnitude} out of range"
        )));
    }
    let count = (fraction * x.frames() as f64).round() as usize;
    let picks = rand::seq::index::sample(rng, x.frames(), count);
    let mut data = x.as_slice().to_vec();
    let d = x.dim();
    for j in picks.iter() {
        for v in &mut data[j * d..(j + 1) * d] {
            *v = rng.random_range(-magnitude..=magnitude);
        }
    }
    FeatureMatrix::new(data, d, x.frames())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::{compute_features, MfccConfig};
    use crate::models::{train_mixture, TrainConfig};

    fn small() -> SynthConfig {
        SynthConfig {
            speakers: 2,
            keywords: 2,
            reps: 10,
            seed: 42,
            ..Default::default()
        }
    }

    #[test]
    fn feature_corpus_shape() {
        let (corpus, bank) = synth_feature_corpus(&small()).unwrap();
        let utts: Vec<&FeatureMatrix> = corpus.cells().iter().flatten().collect();
        assert_eq!(utts.len(), 40);
        for u in utts {
            assert_eq!(u.dim(), 5);
            assert!((60..=100).contains(&u.frames()));
            assert!(u.as_slice().iter().all(|v| v.is_finite()));
        }
        assert_eq!(bank.dim(), 5);
        assert!(bank.models().iter().all(|m| m.n_components() == 8));
    }

    #[test]
    fn cell_centres_are_separated() {
        let bank = synth_bank(&SynthConfig::default()).unwrap();
        let centre = |m: &MixtureModel| -> Vec<f64> {
            (0..m.dim())
                .map(|i| m.components().iter().map(|c| c.weight * c.mean[i]).sum())
                .collect()
        };
        let cs: Vec<Vec<f64>> = bank.models().iter().map(centre).collect();
        assert_eq!(cs.len(), 100);
        let mut closest = f64::INFINITY;
        for i in 0..cs.len() {
            for j in i + 1..cs.len() {
                let d: f64 = cs[i].iter().zip(&cs[j]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                closest = closest.min(d);
            }
        }
        assert!(closest > 1.5, "{closest}");
    }

    #[test]
    fn same_seed_same_corpus() {
        let a = synth_feature_corpus(&small()).unwrap();
        let b = synth_feature_corpus(&small()).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
        let other = synth_feature_corpus(&SynthConfig { seed: 43, ..small() }).unwrap();
        assert_ne!(a.0, other.0);
        let w1 = synth_waveform_corpus(&SynthConfig { reps: 2, ..small() }).unwrap();
        let w2 = synth_waveform_corpus(&SynthConfig { reps: 2, ..small() }).unwrap();
        assert_eq!(w1, w2);
    }

    #[test]
    fn refit_on_many_frames_recovers_means() {
        let cfg = SynthConfig {
            speakers: 1,
            keywords: 1,
            components: 2,
            component_spread: 3.0,
            seed: 5,
            ..Default::default()
        };
        let bank = synth_bank(&cfg).unwrap();
        let truth = bank.model(0, 0);
        let gap: f64 = truth.components()[0]
            .mean
            .iter()
            .zip(&truth.components()[1].mean)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(gap > 2.0, "generator components too close: {gap}");
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = FeatureMatrix::from_frames(&truth.sample(100_000, &mut rng)).unwrap();
        let fit = train_mixture(
            &x,
            Family::Gaussian,
            &TrainConfig {
                n_components: 2,
                ..Default::default()
            },
        )
        .unwrap();
        for g in truth.components() {
            let best = fit
                .components()
                .iter()
                .map(|c| c.mean.iter().zip(&g.mean).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.1, "{best}");
        }
    }

    #[test]
    fn waveforms_feed_the_front_end() {
        let cfg = SynthConfig {
            speakers: 3,
            keywords: 2,
            reps: 2,
            ..small()
        };
        let corpus = synth_waveform_corpus(&cfg).unwrap();
        assert_eq!(corpus.cells().iter().flatten().count(), 12);
        for u in corpus.cells().iter().flatten() {
            assert_eq!(u.sample_rate(), 16000);
            assert!(u.duration_secs() >= 0.5 - 1e-3 && u.duration_secs() <= 0.8 + 1e-3);
            assert!(u.peak() < 0.6);
            let f = compute_features(u, &MfccConfig::default()).unwrap();
            assert_eq!(f.dim(), 38);
        }
    }

    #[test]
    fn interleave_alternates_equal_counts() {
        let a = FeatureMatrix::new(vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0], 2, 3).unwrap();
        let b = FeatureMatrix::new(vec![-1.0, -1.0, -2.0, -2.0], 2, 2).unwrap();
        let x = interleave_frames(&a, &b).unwrap();
        assert_eq!(x.as_slice(), &[1.0, 1.0, -1.0, -1.0, 2.0, 2.0, -2.0, -2.0]);
        let c = FeatureMatrix::new(vec![0.0; 3], 3, 1).unwrap();
        assert!(interleave_frames(&a, &c).is_err());
    }

    #[test]
    fn outliers_replace_the_requested_share() {
        let x = FeatureMatrix::new(vec![0.0; 200], 2, 100).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let y = inject_outliers(&x, 0.05, 50.0, &mut rng).unwrap();
        let changed = y.iter_frames().filter(|f| f.iter().any(|v| *v != 0.0)).count();
        assert_eq!(changed, 5);
        assert!(y.as_slice().iter().all(|v| v.abs() <= 50.0));
        assert!(inject_outliers(&x, 1.5, 1.0, &mut rng).is_err());
    }

    #[test]
    fn impossible_separation_is_reported() {
        let cfg = SynthConfig {
            half_width: 0.1,
            min_separation: 5.0,
            ..small()
        };
        assert!(matches!(synth_bank(&cfg), Err(Error::InvalidConfig(_))));
    }
}
