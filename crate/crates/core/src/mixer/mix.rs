use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::AudioSignal;

/// Peak level a clipping mixture is rescaled to.
pub const PEAK_TARGET: f64 = 0.99;

/// One utterance of the corpus: `(speaker, keyword, repetition)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceRef {
    pub speaker: usize,
    pub keyword: usize,
    pub utterance: usize,
}

impl SourceRef {
    pub fn new(speaker: usize, keyword: usize, utterance: usize) -> Self {
        Self {
            speaker,
            keyword,
            utterance,
        }
    }
}

/// The `(speaker, keyword)` pairs actually present in a mixture, sorted by
/// speaker.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<(usize, usize)>", into = "Vec<(usize, usize)>")]
pub struct GroundTruth {
    pairs: Vec<(usize, usize)>,
}

impl GroundTruth {
    pub fn new(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        if pairs.is_empty() || pairs.len() > 2 {
            return Err(Error::MalformedTruth(format!("{} pairs, expected 1 or 2", pairs.len())));
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::MalformedTruth("speaker repeated".into()));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn speakers(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn keywords(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

impl TryFrom<Vec<(usize, usize)>> for GroundTruth {
    type Error = Error;

    fn try_from(pairs: Vec<(usize, usize)>) -> Result<Self> {
        Self::new(pairs)
    }
}

impl From<GroundTruth> for Vec<(usize, usize)> {
    fn from(t: GroundTruth) -> Self {
        t.pairs
    }
}

/// How two utterances are combined into one mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixSpec {
    pub source_a: SourceRef,
    pub source_b: SourceRef,
    /// Power of `a` over power of `b` after scaling, in dB.
    pub target_rpr_db: f64,
    /// Required overlap as a fraction of the shorter signal.
    pub min_overlap: f64,
    pub seed: u64,
    /// Start of the shorter signal relative to the start of the longer one,
    /// in samples (for equal lengths: `b` relative to `a`). Drawn uniformly
    /// from the feasible range when absent.
    #[serde(default)]
    pub offset: Option<i64>,
}

impl MixSpec {
    pub fn new(source_a: SourceRef, source_b: SourceRef, seed: u64) -> Self {
        Self {
            source_a,
            source_b,
            target_rpr_db: 0.0,
            min_overlap: 0.9,
            seed,
            offset: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_overlap > 0.0 && self.min_overlap <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "min_overlap {} outside (0, 1]",
                self.min_overlap
            )));
        }
        if !self.target_rpr_db.is_finite() {
            return Err(Error::InvalidArgument("target RPR must be finite".into()));
        }
        if self.source_a.speaker == self.source_b.speaker {
            return Err(Error::InvalidArgument(format!(
                "both sources come from speaker {}",
                self.source_a.speaker
            )));
        }
        Ok(())
    }

    pub fn truth(&self) -> Result<GroundTruth> {
        GroundTruth::new(vec![
            (self.source_a.speaker, self.source_a.keyword),
            (self.source_b.speaker, self.source_b.keyword),
        ])
    }
}

/// A mixture together with what was realized while building it.
#[derive(Debug, Clone)]
pub struct MixOutcome {
    pub signal: AudioSignal,
    pub truth: GroundTruth,
    /// RPR of the two scaled components, in dB.
    pub rpr_db: f64,
    /// Shared support over the shorter signal's length.
    pub overlap: f64,
    /// Start of `b` relative to `a`, in samples.
    pub offset_b: i64,
    pub gain_a: f64,
    pub gain_b: f64,
}

/// `10 log10(P_a / P_b)` with `P` the mean squared amplitude of each signal.
pub fn compute_rpr(a: &AudioSignal, b: &AudioSignal) -> Result<f64> {
    if a.sample_rate() != b.sample_rate() {
        return Err(Error::RateMismatch(a.sample_rate(), b.sample_rate()));
    }
    let (pa, pb) = (a.power(), b.power());
    if pa <= 0.0 || pb <= 0.0 {
        return Err(Error::ZeroPower);
    }
    Ok(10.0 * (pa / pb).log10())
}

/// Overlap of `[0, len_a)` and `[offset_b, offset_b + len_b)` over the shorter
/// length.
pub fn overlap_fraction(len_a: usize, len_b: usize, offset_b: i64) -> f64 {
    let start = offset_b.max(0);
    let end = (offset_b + len_b as i64).min(len_a as i64);
    let shared = (end - start).max(0) as f64;
    shared / len_a.min(len_b) as f64
}

/// Adds `a` and `b` at the requested RPR with the shorter one placed so that
/// the overlap constraint holds. Both components are scaled about their
/// geometric-mean power, so `mix(a, b, r)` and `mix(b, a, -r)` produce the
/// same samples. If the sum clips it is rescaled as a whole to
/// [`PEAK_TARGET`], which leaves the RPR unchanged.
pub fn mix(a: &AudioSignal, b: &AudioSignal, spec: &MixSpec) -> Result<MixOutcome> {
    spec.validate()?;
    let truth = spec.truth()?;
    if a.sample_rate() != b.sample_rate() {
        return Err(Error::RateMismatch(a.sample_rate(), b.sample_rate()));
    }
    let (pa, pb) = (a.power(), b.power());
    if pa <= 0.0 || pb <= 0.0 {
        return Err(Error::ZeroPower);
    }
    let geo = (pa * pb).sqrt();
    let half = spec.target_rpr_db / 20.0;
    let gain_a = (geo * 10f64.powf(half) / pa).sqrt();
    let gain_b = (geo * 10f64.powf(-half) / pb).sqrt();

    let b_is_shorter = b.len() <= a.len();
    let (long, short) = if b_is_shorter { (a.len(), b.len()) } else { (b.len(), a.len()) };
    let need = ((spec.min_overlap * short as f64).ceil() as usize).clamp(1, short);
    let lo = -((short - need) as i64);
    let hi = (long - need) as i64;
    let rel = match spec.offset {
        Some(o) => {
            if o < lo || o > hi {
                return Err(Error::OverlapInfeasible(format!(
                    "offset {o} outside [{lo}, {hi}] for lengths {long} and {short}"
                )));
            }
            o
        }
        None => ChaCha8Rng::seed_from_u64(spec.seed).random_range(lo..=hi),
    };
    let offset_b = if b_is_shorter { rel } else { -rel };

    let start = offset_b.min(0);
    let end = (a.len() as i64).max(offset_b + b.len() as i64);
    let mut out = vec![0.0; (end - start) as usize];
    let a_at = (-start) as usize;
    let b_at = (offset_b - start) as usize;
    for (o, x) in out[a_at..].iter_mut().zip(a.samples()) {
        *o += gain_a * x;
    }
    for (o, x) in out[b_at..].iter_mut().zip(b.samples()) {
        *o += gain_b * x;
    }
    let peak = out.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let (gain_a, gain_b) = if peak > 1.0 {
        let s = PEAK_TARGET / peak;
        out.iter_mut().for_each(|x| *x *= s);
        (gain_a * s, gain_b * s)
    } else {
        (gain_a, gain_b)
    };
    let rpr_db = compute_rpr(&a.scaled(gain_a), &b.scaled(gain_b))?;
    Ok(MixOutcome {
        signal: AudioSignal::new(out, a.sample_rate())?,
        truth,
        rpr_db,
        overlap: overlap_fraction(a.len(), b.len(), offset_b),
        offset_b,
        gain_a,
        gain_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::{prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn tone(freq: f64, amp: f64, len: usize) -> AudioSignal {
        let s = (0..len)
            .map(|i| amp * (2.0 * std::f64::consts::PI * freq * i as f64 / 16000.0).sin())
            .collect();
        AudioSignal::new(s, 16000).unwrap()
    }

    fn spec(seed: u64) -> MixSpec {
        MixSpec::new(SourceRef::new(0, 1, 0), SourceRef::new(1, 2, 0), seed)
    }

    #[test]
    fn rpr_identities() {
        let a = tone(440.0, 0.5, 1600);
        assert_eq!(compute_rpr(&a, &a).unwrap(), 0.0);
        let half = a.scaled(0.5);
        assert!((compute_rpr(&a, &half).unwrap() - 6.020599913279624).abs() < 1e-9);
        let silent = AudioSignal::new(vec![0.0; 10], 16000).unwrap();
        assert!(matches!(compute_rpr(&a, &silent), Err(Error::ZeroPower)));
        let other_rate = AudioSignal::new(vec![0.1; 10], 8000).unwrap();
        assert!(matches!(compute_rpr(&a, &other_rate), Err(Error::RateMismatch(16000, 8000))));
    }

    #[test]
    fn rpr_matches_direct_power_ratio() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..777).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..500).map(|_| rng.random_range(-0.3..0.3)).collect();
        let pa = a.iter().map(|x| x * x).sum::<f64>() / a.len() as f64;
        let pb = b.iter().map(|x| x * x).sum::<f64>() / b.len() as f64;
        let expected = 10.0 * (pa / pb).log10();
        let got = compute_rpr(&AudioSignal::new(a, 16000).unwrap(), &AudioSignal::new(b, 16000).unwrap()).unwrap();
        assert!((got - expected).abs() < 1e-9);
    }

    #[test]
    fn equal_lengths_zero_offset_overlap_one() {
        let mut s = spec(1);
        s.offset = Some(0);
        let out = mix(&tone(300.0, 0.3, 2000), &tone(700.0, 0.1, 2000), &s).unwrap();
        assert_eq!(out.overlap, 1.0);
        assert_eq!(out.signal.len(), 2000);
        assert!(out.rpr_db.abs() < 0.01);
    }

    #[test]
    fn shorter_contained_in_longer() {
        let mut s = spec(1);
        s.offset = Some(500);
        let out = mix(&tone(300.0, 0.3, 4000), &tone(700.0, 0.1, 1000), &s).unwrap();
        assert_eq!(out.overlap, 1.0);
        assert_eq!(out.signal.len(), 4000);
    }

    #[test]
    fn target_rpr_is_met() {
        for target in [-6.0, 0.0, 3.5] {
            let mut s = spec(9);
            s.target_rpr_db = target;
            let out = mix(&tone(300.0, 0.01, 3000), &tone(900.0, 0.7, 2500), &s).unwrap();
            assert!((out.rpr_db - target).abs() < 0.01, "{target} vs {}", out.rpr_db);
        }
    }

    #[test]
    fn clipping_is_normalized_jointly() {
        let mut s = spec(2);
        s.offset = Some(0);
        let a = AudioSignal::new(vec![0.9; 100], 16000).unwrap();
        let b = AudioSignal::new(vec![0.8; 100], 16000).unwrap();
        let out = mix(&a, &b, &s).unwrap();
        assert!((out.signal.peak() - PEAK_TARGET).abs() < 1e-12);
        assert!(out.rpr_db.abs() < 1e-9);
    }

    #[test]
    fn infeasible_offset_and_bad_spec() {
        let mut s = spec(2);
        s.offset = Some(900);
        assert!(matches!(
            mix(&tone(300.0, 0.3, 1000), &tone(700.0, 0.3, 1000), &s),
            Err(Error::OverlapInfeasible(_))
        ));
        let mut same = spec(2);
        same.source_b.speaker = 0;
        assert!(same.validate().is_err());
        let mut zero = spec(2);
        zero.min_overlap = 0.0;
        assert!(zero.validate().is_err());
    }

    #[test]
    fn truth_is_sorted_and_checked() {
        let t = GroundTruth::new(vec![(3, 1), (1, 1)]).unwrap();
        assert_eq!(t.pairs(), &[(1, 1), (3, 1)]);
        assert!(GroundTruth::new(vec![(1, 1), (1, 2)]).is_err());
        assert!(GroundTruth::new(vec![]).is_err());
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(serde_json::from_str::<GroundTruth>(&json).unwrap(), t);
    }

    fn signal(len: usize, seed: u64) -> AudioSignal {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AudioSignal::new((0..len).map(|_| rng.random_range(-0.5..0.5)).collect(), 16000).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn overlap_and_rpr_hold(len_a in 50usize..600, len_b in 50usize..600, seed: u64, r in -10.0f64..10.0, ov in 0.05f64..=1.0) {
            let mut s = spec(seed);
            s.target_rpr_db = r;
            s.min_overlap = ov;
            let out = mix(&signal(len_a, seed), &signal(len_b, seed ^ 1), &s).unwrap();
            prop_assert!(out.overlap + 1e-12 >= ov);
            prop_assert!((out.rpr_db - r).abs() < 0.01);
            prop_assert_eq!(out.truth.pairs(), &[(0, 1), (1, 2)]);
        }

        #[test]
        fn swapping_sources_negates_rpr(len_a in 50usize..600, len_b in 50usize..600, seed: u64, r in -10.0f64..10.0) {
            let (a, b) = (signal(len_a, seed), signal(len_b, seed ^ 1));
            let mut ab = spec(seed);
            ab.target_rpr_db = r;
            let mut ba = MixSpec::new(ab.source_b, ab.source_a, seed);
            ba.target_rpr_db = -r;
            if len_a == len_b {
                ab.offset = Some(7);
                ba.offset = Some(-7);
            }
            let x = mix(&a, &b, &ab).unwrap();
            let y = mix(&b, &a, &ba).unwrap();
            prop_assert_eq!(x.signal.len(), y.signal.len());
            for (p, q) in x.signal.samples().iter().zip(y.signal.samples()) {
                prop_assert!((p - q).abs() <= 1e-12);
            }
            prop_assert_eq!(x.truth, y.truth);
        }
    }
}
