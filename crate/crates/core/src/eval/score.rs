use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lvem::DetectionResult;
use crate::mixer::GroundTruth;

/// Hit flags for one two-speaker utterance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct UtteranceScore {
    pub at_least_one_speaker: bool,
    pub both_speakers: bool,
    pub at_least_one_keyword: bool,
    pub both_keywords: bool,
    pub at_least_one_pair: bool,
    pub both_pairs: bool,
}

impl UtteranceScore {
    fn from_hits(speakers: usize, keywords: usize, pairs: usize) -> Self {
        Self {
            at_least_one_speaker: speakers >= 1,
            both_speakers: speakers >= 2,
            at_least_one_keyword: keywords >= 1,
            both_keywords: keywords >= 2,
            at_least_one_pair: pairs >= 1,
            both_pairs: pairs >= 2,
        }
    }

    fn flags(&self) -> [bool; 6] {
        [
            self.at_least_one_speaker,
            self.both_speakers,
            self.at_least_one_keyword,
            self.both_keywords,
            self.at_least_one_pair,
            self.both_pairs,
        ]
    }
}

/// Scores decoded pairs against a two-pair truth.
///
/// Speakers and pairs are compared as sets. Keywords are compared as
/// multisets, so when both speakers said the same keyword it has to be
/// decoded twice to count twice. A keyword counts regardless of which
/// speaker it was attributed to; attribution is what the pair columns
/// measure.
pub fn score_utterance(result: &DetectionResult, truth: &GroundTruth) -> Result<UtteranceScore> {
    if truth.pairs().len() != 2 {
        return Err(Error::MalformedTruth(format!(
            "two-speaker scoring needs 2 pairs, got {}",
            truth.pairs().len()
        )));
    }
    let true_speakers: BTreeSet<usize> = truth.speakers().into_iter().collect();
    let found_speakers: BTreeSet<usize> = result.speakers().into_iter().collect();
    let speaker_hits = true_speakers.intersection(&found_speakers).count();

    let mut wanted: HashMap<usize, usize> = HashMap::new();
    for l in truth.keywords() {
        *wanted.entry(l).or_default() += 1;
    }
    let mut found: HashMap<usize, usize> = HashMap::new();
    for l in result.keywords() {
        *found.entry(l).or_default() += 1;
    }
    let keyword_hits = wanted
        .iter()
        .map(|(l, &c)| c.min(found.get(l).copied().unwrap_or(0)))
        .sum();

    let true_pairs: BTreeSet<(usize, usize)> = truth.pairs().iter().copied().collect();
    let found_pairs: BTreeSet<(usize, usize)> =
        result.pairs.iter().map(|p| (p.speaker, p.keyword)).collect();
    let pair_hits = true_pairs.intersection(&found_pairs).count();

    Ok(UtteranceScore::from_hits(speaker_hits, keyword_hits, pair_hits))
}

/// Percentages of utterances meeting each criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    pub n_utterances: usize,
    pub at_least_one_speaker: f64,
    pub both_speakers: f64,
    pub at_least_one_keyword: f64,
    pub both_keywords: f64,
    pub at_least_one_pair: f64,
    pub both_pairs: f64,
}

impl MetricRow {
    pub fn values(&self) -> [f64; 6] {
        [
            self.at_least_one_speaker,
            self.both_speakers,
            self.at_least_one_keyword,
            self.both_keywords,
            self.at_least_one_pair,
            self.both_pairs,
        ]
    }

    /// Ordering constraints every row satisfies by construction.
    pub fn check(&self) -> Result<()> {
        let v = self.values();
        let fail = |m: String| Err(Error::CheckFailed(m));
        if v.iter().any(|x| !(0.0..=100.0).contains(x)) {
            return fail(format!("percentage outside [0, 100]: {v:?}"));
        }
        for (both, one, name) in [(1, 0, "speakers"), (3, 2, "keywords"), (5, 4, "pairs")] {
            if v[both] > v[one] {
                return fail(format!("both {name} {} exceeds at least one {}", v[both], v[one]));
            }
        }
        if self.both_pairs > self.both_speakers.min(self.both_keywords) {
            return fail(format!(
                "both pairs {} exceeds min(both speakers, both keywords)",
                self.both_pairs
            ));
        }
        Ok(())
    }
}

/// Pools utterance scores into one row of percentages.
pub fn aggregate(records: &[UtteranceScore]) -> Result<MetricRow> {
    if records.is_empty() {
        return Err(Error::Empty("utterance scores"));
    }
    let mut counts = [0usize; 6];
    for r in records {
        for (c, f) in counts.iter_mut().zip(r.flags()) {
            *c += f as usize;
        }
    }
    let n = records.len();
    let pct = |c: usize| 100.0 * c as f64 / n as f64;
    Ok(MetricRow {
        n_utterances: n,
        at_least_one_speaker: pct(counts[0]),
        both_speakers: pct(counts[1]),
        at_least_one_keyword: pct(counts[2]),
        both_keywords: pct(counts[3]),
        at_least_one_pair: pct(counts[4]),
        both_pairs: pct(counts[5]),
    })
}
